//! Gate targets, parameter search, composition and multi-qubit embedding.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gatemodel::{
    delta_distance, fit_zn_form, gate_error, phase_distance, GateErrorReport, ScalingLaw,
    ZhuNakamuraForm,
};
use crate::linalg::CMatrix;
use crate::model::ModelSpec;
use crate::numeric::linspace;
use crate::propagator::{
    computational_evolution_operator, full_evolution_operator, half_passage_p, IntegratorSettings,
};
use crate::scalar::Real;
use crate::simplex::{self, SimplexOptions};
use crate::trajectory::Trajectory;

/// Largest impact parameter accepted by the search.
pub const MAX_IMPACT: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateName {
    X,
    #[serde(rename = "iX")]
    IX,
    Y,
    Z,
    #[serde(rename = "iZ")]
    IZ,
    T,
    /// `e^{-i pi/8} T = diag(e^{-i pi/8}, e^{i pi/8})`, the form a symmetric
    /// passage can reach.
    #[serde(rename = "T~")]
    TPhased,
    H,
    #[serde(rename = "iH")]
    IH,
}

impl GateName {
    pub const ALL: [GateName; 9] = [
        GateName::X,
        GateName::IX,
        GateName::Y,
        GateName::Z,
        GateName::IZ,
        GateName::T,
        GateName::TPhased,
        GateName::H,
        GateName::IH,
    ];

    pub fn label(self) -> &'static str {
        match self {
            GateName::X => "X",
            GateName::IX => "iX",
            GateName::Y => "Y",
            GateName::Z => "Z",
            GateName::IZ => "iZ",
            GateName::T => "T",
            GateName::TPhased => "T~",
            GateName::H => "H",
            GateName::IH => "iH",
        }
    }
}

impl fmt::Display for GateName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for GateName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GateName::ALL
            .into_iter()
            .find(|g| g.label() == s)
            .or(match s {
                "x" => Some(GateName::X),
                "y" => Some(GateName::Y),
                "z" => Some(GateName::Z),
                "t" => Some(GateName::T),
                "h" => Some(GateName::H),
                "ix" => Some(GateName::IX),
                "iz" => Some(GateName::IZ),
                "ih" => Some(GateName::IH),
                "t~" | "tphased" | "TPhased" => Some(GateName::TPhased),
                _ => None,
            })
            .ok_or_else(|| Error::UnknownGate(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateTarget<T> {
    pub name: GateName,
    pub matrix: CMatrix<T>,
}

pub fn target_unitary<T: Real>(name: GateName) -> GateTarget<T> {
    let z = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let i = Complex::new(T::zero(), T::one());
    let r = T::FRAC_1_SQRT_2();
    let h = Complex::new(r, T::zero());
    let eighth = T::PI() / T::lit(8.0);
    let matrix = match name {
        GateName::X => CMatrix::from_2x2([[z, one], [one, z]]),
        GateName::IX => CMatrix::from_2x2([[z, i], [i, z]]),
        // -iXZ, which is minus the usual Pauli Y.
        GateName::Y => CMatrix::from_2x2([[z, i], [-i, z]]),
        GateName::Z => CMatrix::from_2x2([[one, z], [z, -one]]),
        GateName::IZ => CMatrix::from_2x2([[i, z], [z, -i]]),
        GateName::T => CMatrix::from_2x2([[one, z], [z, Complex::from_polar(T::one(), T::FRAC_PI_4())]]),
        GateName::TPhased => CMatrix::from_2x2([
            [Complex::from_polar(T::one(), -eighth), z],
            [z, Complex::from_polar(T::one(), eighth)],
        ]),
        GateName::H => CMatrix::from_2x2([[h, h], [h, -h]]),
        GateName::IH => CMatrix::from_2x2([[i * r, i * r], [i * r, -i * r]]),
    };
    GateTarget { name, matrix }
}

/// Condition on the fitted phases that characterizes a gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PhaseCondition {
    /// `a00 - a01 ≡ target (mod period)`.
    Difference { target: f64, period: f64 },
    /// Both phases pinned.
    Phases { alpha00: f64, alpha01: f64 },
}

impl PhaseCondition {
    /// Distance in radians of a fitted form from the condition.
    pub fn distance<T: Real>(&self, form: &ZhuNakamuraForm<T>) -> T {
        match *self {
            PhaseCondition::Difference { target, period } => {
                delta_distance(form, T::lit(target), T::lit(period))
            }
            PhaseCondition::Phases { alpha00, alpha01 } => {
                phase_distance(form, T::lit(alpha00), T::lit(alpha01))
            }
        }
    }
}

/// Rectangular `(v, b)` search window with its coarse grid density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchWindow<T> {
    pub v_min: T,
    pub v_max: T,
    pub b_min: T,
    pub b_max: T,
    pub nv: usize,
    pub nb: usize,
    /// Objective evaluations allowed for the simplex refinement.
    pub refine_evals: usize,
}

impl<T: Real> SearchWindow<T> {
    pub fn new(v: (T, T), b: (T, T)) -> Self {
        let nb = if b.0 == b.1 { 1 } else { 48 };
        Self {
            v_min: v.0,
            v_max: v.1,
            b_min: b.0,
            b_max: b.1,
            nv: 100,
            nb,
            refine_evals: 400,
        }
    }

    pub fn with_grid(mut self, nv: usize, nb: usize) -> Self {
        self.nv = nv;
        self.nb = if self.b_min == self.b_max { 1 } else { nb };
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &'static str, value: T, domain: &'static str| {
            Err(Error::Domain {
                what,
                value: value.to_f64_lossy(),
                domain,
            })
        };
        if !(self.v_min > T::zero() && self.v_max <= T::one() && self.v_min <= self.v_max) {
            return bad("v range", self.v_min, "0 < v_min <= v_max <= 1");
        }
        if !(self.b_min >= T::zero() && self.b_max <= T::lit(MAX_IMPACT) && self.b_min <= self.b_max) {
            return bad("b range", self.b_min, "0 <= b_min <= b_max <= 0.95");
        }
        if self.nv == 0 || self.nb == 0 {
            return Err(Error::Empty("search grid"));
        }
        Ok(())
    }

    fn contains(&self, v: T, b: T) -> bool {
        v >= self.v_min && v <= self.v_max && b >= self.b_min && b <= self.b_max
    }

    fn axis(lo: T, hi: T, n: usize) -> Vec<T> {
        if n == 1 || lo == hi {
            vec![(lo + hi) * T::lit(0.5)]
        } else {
            linspace(lo, hi, n)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecipeKind {
    /// One symmetric passage.
    Single,
    /// The passage acts on `pair` of an `n_qubits` register.
    Embedded { n_qubits: usize, pair: (usize, usize) },
    /// Product of other recipes, first listed acts first.
    Composite(Vec<String>),
}

/// Everything needed to synthesize and check one named gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateRecipe {
    pub name: String,
    pub target: GateName,
    pub kind: RecipeKind,
    pub window: SearchWindow<f64>,
    /// Known operating point.
    pub nominal_point: (f64, f64),
    pub phase_condition: PhaseCondition,
    pub scaling_law: ScalingLaw,
    /// Expected half-passage `p` and tolerance, when the gate depends on it.
    pub expected_half_p: Option<(f64, f64)>,
    /// Gate to compare the full operator against, when it differs from `target`.
    pub ideal: Option<String>,
}

pub const RECIPE_NAMES: [&str; 7] = ["not", "z", "t", "hadamard", "cnot", "toffoli", "y"];

pub fn recipe(name: &str) -> Result<GateRecipe> {
    use std::f64::consts::PI;
    let single = |name: &str,
                  target,
                  window: SearchWindow<f64>,
                  point,
                  cond,
                  law,
                  half_p| GateRecipe {
        name: name.to_string(),
        target,
        kind: RecipeKind::Single,
        window,
        nominal_point: point,
        phase_condition: cond,
        scaling_law: law,
        expected_half_p: half_p,
        ideal: None,
    };
    let not = || {
        single(
            "not",
            GateName::IX,
            SearchWindow::new((0.15, 0.35), (0.0, 0.0)),
            (0.2547, 0.0),
            PhaseCondition::Difference {
                target: PI / 2.0,
                period: PI,
            },
            ScalingLaw::Not,
            Some((0.5, 0.05)),
        )
    };
    let r = match name.to_ascii_lowercase().as_str() {
        "not" | "x" => not(),
        "z" => single(
            "z",
            GateName::IZ,
            SearchWindow::new((0.04, 0.065), (0.05, 0.2)),
            (0.051, 0.1094),
            PhaseCondition::Phases {
                alpha00: PI / 4.0,
                alpha01: 5.0 * PI / 4.0,
            },
            ScalingLaw::Z,
            None,
        ),
        "t" => single(
            "t",
            GateName::TPhased,
            SearchWindow::new((0.028, 0.04), (0.15, 0.3)),
            (0.0337, 0.2164),
            PhaseCondition::Phases {
                alpha00: 15.0 * PI / 16.0,
                alpha01: -PI / 16.0,
            },
            ScalingLaw::T,
            None,
        ),
        "hadamard" | "h" => single(
            "hadamard",
            GateName::IH,
            SearchWindow::new((0.2, 0.3), (0.2, 0.3)),
            (0.2677, 0.2249),
            PhaseCondition::Phases {
                alpha00: 3.0 * PI / 8.0,
                alpha01: -7.0 * PI / 8.0,
            },
            ScalingLaw::Unknown,
            Some((0.5, 0.05)),
        ),
        "cnot" => GateRecipe {
            name: "cnot".into(),
            kind: RecipeKind::Embedded {
                n_qubits: 2,
                pair: (2, 3),
            },
            ideal: Some("cnot".into()),
            ..not()
        },
        "toffoli" => GateRecipe {
            name: "toffoli".into(),
            kind: RecipeKind::Embedded {
                n_qubits: 3,
                pair: (6, 7),
            },
            ideal: Some("toffoli".into()),
            ..not()
        },
        "y" => GateRecipe {
            name: "y".into(),
            target: GateName::Y,
            kind: RecipeKind::Composite(vec!["z".into(), "not".into()]),
            ideal: Some("Y".into()),
            scaling_law: ScalingLaw::Unknown,
            expected_half_p: None,
            ..not()
        },
        _ => return Err(Error::UnknownGate(name.to_string())),
    };
    Ok(r)
}

/// Ideal multi-qubit gate: X on the last qubit controlled by all others.
pub fn controlled_not<T: Real>(n_qubits: usize) -> CMatrix<T> {
    let dim = 1usize << n_qubits;
    let x = target_unitary::<T>(GateName::X).matrix;
    embed(&x, n_qubits, (dim - 2, dim - 1))
        .expect("pair is in range")
        .full_unitary
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchStage {
    Grid,
    Refine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint<T> {
    pub stage: SearchStage,
    pub v: T,
    pub b: T,
    /// `d_max` against the target; `inf` where the evaluation failed.
    pub objective: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisResult<T> {
    pub target: GateName,
    pub v_opt: T,
    pub b_opt: T,
    pub gate_error: GateErrorReport<T>,
    pub zn: ZhuNakamuraForm<T>,
    pub half_p: T,
    pub unitary: CMatrix<T>,
    /// `false` when the simplex ran out of evaluations.
    pub converged: bool,
    pub search_trace: Vec<TracePoint<T>>,
}

fn objective<T: Real>(
    model: &ModelSpec<T>,
    target: &CMatrix<T>,
    v: T,
    b: T,
    settings: &IntegratorSettings<T>,
) -> T {
    let eval = || -> Result<T> {
        let u = full_evolution_operator(model, &Trajectory::new(v, b)?, settings)?;
        Ok(gate_error(&u.unitary, target)?.d_max)
    };
    eval().unwrap_or(T::infinity())
}

/// Coarse grid search of `d_max(U(v, b), target)` followed by simplex
/// refinement from the best cell. Grid ties go to the smaller `v`.
pub fn synthesize<T: Real>(
    model: &ModelSpec<T>,
    target: &GateTarget<T>,
    window: &SearchWindow<T>,
    settings: &IntegratorSettings<T>,
) -> Result<SynthesisResult<T>> {
    if target.matrix.dim() != 2 {
        return Err(Error::DimensionMismatch {
            left: target.matrix.dim(),
            right: 2,
        });
    }
    window.validate()?;
    settings.validate()?;
    let vs = SearchWindow::axis(window.v_min, window.v_max, window.nv);
    let bs = SearchWindow::axis(window.b_min, window.b_max, window.nb);
    let cells: Vec<(T, T)> = vs
        .iter()
        .flat_map(|&v| bs.iter().map(move |&b| (v, b)))
        .collect();
    let values: Vec<T> = cells
        .par_iter()
        .map(|&(v, b)| objective(model, &target.matrix, v, b, settings))
        .collect();
    let mut trace: Vec<TracePoint<T>> = cells
        .iter()
        .zip(&values)
        .map(|(&(v, b), &objective)| TracePoint {
            stage: SearchStage::Grid,
            v,
            b,
            objective,
        })
        .collect();
    let mut best = 0;
    for (k, &f) in values.iter().enumerate() {
        if f < values[best] {
            best = k;
        }
    }
    if !values[best].is_finite() {
        return Err(Error::Search("no grid point could be evaluated".into()));
    }
    let (v0, b0) = cells[best];
    let mut best_point = (v0, b0, values[best]);

    let span = |lo: T, hi: T, n: usize| {
        if n > 1 {
            (hi - lo) / T::from_usize(n - 1).unwrap()
        } else {
            T::zero()
        }
    };
    let dv = span(window.v_min, window.v_max, vs.len());
    let db = span(window.b_min, window.b_max, bs.len());
    let opts = SimplexOptions {
        max_evals: window.refine_evals,
        f_tol: T::lit(1e-16).max(T::epsilon()),
        x_tol: T::lit(1e-10).max(T::epsilon().sqrt()),
    };
    let mut refine_trace = Vec::new();
    let converged = if db > T::zero() {
        let r = simplex::minimize(
            |x: &[T]| {
                let f = if window.contains(x[0], x[1]) {
                    objective(model, &target.matrix, x[0], x[1], settings)
                } else {
                    T::infinity()
                };
                refine_trace.push(TracePoint {
                    stage: SearchStage::Refine,
                    v: x[0],
                    b: x[1],
                    objective: f,
                });
                f
            },
            &[v0, b0],
            &[dv * T::lit(0.5), db * T::lit(0.5)],
            &opts,
        );
        if r.fx < best_point.2 {
            best_point = (r.x[0], r.x[1], r.fx);
        }
        r.converged
    } else if dv > T::zero() {
        let r = simplex::minimize(
            |x: &[T]| {
                let f = if window.contains(x[0], b0) {
                    objective(model, &target.matrix, x[0], b0, settings)
                } else {
                    T::infinity()
                };
                refine_trace.push(TracePoint {
                    stage: SearchStage::Refine,
                    v: x[0],
                    b: b0,
                    objective: f,
                });
                f
            },
            &[v0],
            &[dv * T::lit(0.5)],
            &opts,
        );
        if r.fx < best_point.2 {
            best_point = (r.x[0], b0, r.fx);
        }
        r.converged
    } else {
        true
    };
    trace.extend(refine_trace);

    let (v_opt, b_opt, _) = best_point;
    let traj = Trajectory::new(v_opt, b_opt)?;
    let u = full_evolution_operator(model, &traj, settings)?.unitary;
    let half_p = half_passage_p(model, &traj, settings)?;
    let zn = fit_zn_form(&u, half_p)?;
    Ok(SynthesisResult {
        target: target.name,
        v_opt,
        b_opt,
        gate_error: gate_error(&u, &target.matrix)?,
        zn,
        half_p,
        unitary: u,
        converged,
        search_trace: trace,
    })
}

/// Product of gates applied in order: the first listed acts first.
pub fn compose<T: Real>(gates: &[CMatrix<T>]) -> Result<CMatrix<T>> {
    let (first, rest) = gates.split_first().ok_or(Error::Empty("gate list"))?;
    rest.iter().try_fold(first.clone(), |acc, g| {
        if g.dim() != acc.dim() {
            return Err(Error::DimensionMismatch {
                left: g.dim(),
                right: acc.dim(),
            });
        }
        Ok(g * &acc)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddedGate<T> {
    pub n_qubits: usize,
    pub coupled_pair: (usize, usize),
    pub full_unitary: CMatrix<T>,
    pub block: CMatrix<T>,
}

impl<T: Real> EmbeddedGate<T> {
    /// Largest entry of `full_unitary - I` outside the coupled pair.
    pub fn complement_deviation(&self) -> T {
        let (a, b) = self.coupled_pair;
        let n = self.full_unitary.dim();
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                if (i == a || i == b) && (j == a || j == b) {
                    continue;
                }
                let ideal = if i == j { T::one() } else { T::zero() };
                worst = worst.max((self.full_unitary[(i, j)] - Complex::new(ideal, T::zero())).norm());
            }
        }
        worst
    }
}

/// Places a 2x2 block on `pair` of an `n_qubits` register, identity elsewhere.
pub fn embed<T: Real>(block: &CMatrix<T>, n_qubits: usize, pair: (usize, usize)) -> Result<EmbeddedGate<T>> {
    if block.dim() != 2 {
        return Err(Error::DimensionMismatch {
            left: block.dim(),
            right: 2,
        });
    }
    if n_qubits == 0 || n_qubits > 16 {
        return Err(Error::Embedding(format!("unsupported register size {n_qubits}")));
    }
    let dim = 1usize << n_qubits;
    let (a, b) = pair;
    if a == b || a >= dim || b >= dim {
        return Err(Error::Embedding(format!(
            "pair ({a}, {b}) must be distinct indices below {dim}"
        )));
    }
    let mut full = CMatrix::identity(dim);
    full[(a, a)] = block[(0, 0)];
    full[(a, b)] = block[(0, 1)];
    full[(b, a)] = block[(1, 0)];
    full[(b, b)] = block[(1, 1)];
    Ok(EmbeddedGate {
        n_qubits,
        coupled_pair: pair,
        full_unitary: full,
        block: block.clone(),
    })
}

/// Hamiltonian on the coupled pair of an embedded register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairHamiltonian {
    /// The two-state model verbatim: diabatic energies of opposite sign.
    AvoidedCrossing,
    /// Both coupled diagonal entries `+f(s)`, so the diabatic energies cross.
    Literal,
}

/// Result of integrating the whole register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddedDynamics<T> {
    pub gate: EmbeddedGate<T>,
    /// Max-norm gap between the integrated register operator and the
    /// embedding of its own block.
    pub leakage: T,
    pub unitarity_defect: T,
}

/// Integrates the full register with the model acting on `pair` and a zero
/// Hamiltonian on every other basis state.
pub fn embedded_dynamics<T: Real>(
    model: &ModelSpec<T>,
    traj: &Trajectory<T>,
    n_qubits: usize,
    pair: (usize, usize),
    kind: PairHamiltonian,
    settings: &IntegratorSettings<T>,
) -> Result<EmbeddedDynamics<T>> {
    // Validates the pair before the integration.
    embed(&CMatrix::<T>::identity(2), n_qubits, pair)?;
    let dim = 1usize << n_qubits;
    let (a, b) = pair;
    let h = |s: T, out: &mut [T]| {
        let m = model.hamiltonian_at(s).expect("s stays in [0, 1] along a trajectory");
        out.iter_mut().for_each(|x| *x = T::zero());
        let (d0, d1) = match kind {
            PairHamiltonian::AvoidedCrossing => (m[0][0], m[1][1]),
            PairHamiltonian::Literal => (model.f(s), model.f(s)),
        };
        out[a * dim + a] = d0;
        out[b * dim + b] = d1;
        out[a * dim + b] = m[0][1];
        out[b * dim + a] = m[1][0];
    };
    let evo = computational_evolution_operator(h, dim, traj, settings)?;
    let block = CMatrix::from_2x2([
        [evo.unitary[(a, a)], evo.unitary[(a, b)]],
        [evo.unitary[(b, a)], evo.unitary[(b, b)]],
    ]);
    let gate = embed(&block, n_qubits, pair)?;
    let leakage = gate.full_unitary.max_abs_diff(&evo.unitary);
    Ok(EmbeddedDynamics {
        gate,
        leakage,
        unitarity_defect: evo.unitarity_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn targets_are_unitary() {
        for g in GateName::ALL {
            assert!(target_unitary::<f64>(g).matrix.unitarity_defect() < 1e-15, "{g}");
        }
    }

    #[test]
    fn t_gate_entries() {
        let t = target_unitary::<f64>(GateName::T).matrix;
        assert_eq!(t[(0, 0)], c(1.0, 0.0));
        assert!((t[(1, 1)] - Complex::from_polar(1.0, std::f64::consts::FRAC_PI_4)).norm() < 1e-16);
        let tp = target_unitary::<f64>(GateName::TPhased).matrix;
        let phase = Complex::from_polar(1.0, -std::f64::consts::PI / 8.0);
        assert!(tp.max_abs_diff(&t.scale(phase)) < 1e-15);
    }

    #[test]
    fn y_is_minus_i_xz() {
        let x = target_unitary::<f64>(GateName::X).matrix;
        let z = target_unitary::<f64>(GateName::Z).matrix;
        let y = target_unitary::<f64>(GateName::Y).matrix;
        assert!((&x * &z).scale(c(0.0, -1.0)).max_abs_diff(&y) < 1e-15);
    }

    #[test]
    fn names_parse() {
        assert_eq!("iZ".parse::<GateName>().unwrap(), GateName::IZ);
        assert_eq!("ih".parse::<GateName>().unwrap(), GateName::IH);
        assert!("cz".parse::<GateName>().is_err());
        for n in RECIPE_NAMES {
            assert_eq!(recipe(n).unwrap().name, n);
        }
        assert!(matches!(recipe("swap"), Err(Error::UnknownGate(_))));
    }

    #[test]
    fn compose_order() {
        let x = target_unitary::<f64>(GateName::IX).matrix;
        let z = target_unitary::<f64>(GateName::IZ).matrix;
        // z acts first: x * z.
        assert_eq!(compose(&[z.clone(), x.clone()]).unwrap(), &x * &z);
        assert_eq!(compose(&[x.clone()]).unwrap(), x);
        assert!(compose::<f64>(&[]).is_err());
        let back = compose(&[x.clone(), x.adjoint()]).unwrap();
        assert!(back.max_abs_diff(&CMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn embed_cnot_block() {
        let ix = target_unitary::<f64>(GateName::IX).matrix;
        let e = embed(&ix, 2, (2, 3)).unwrap();
        assert_eq!(e.complement_deviation(), 0.0);
        assert_eq!(e.full_unitary[(2, 3)], c(0.0, 1.0));
        assert_eq!(e.full_unitary[(1, 1)], c(1.0, 0.0));
        let cnot = controlled_not::<f64>(2);
        assert_eq!(cnot[(3, 2)], c(1.0, 0.0));
        assert!(e.full_unitary.max_abs_diff(&cnot) > 0.9);
        let ident = embed(&CMatrix::<f64>::identity(2), 3, (6, 7)).unwrap();
        assert_eq!(ident.full_unitary, CMatrix::identity(8));
    }

    #[test]
    fn embed_rejects_bad_pairs() {
        let i2 = CMatrix::<f64>::identity(2);
        assert!(embed(&i2, 2, (1, 1)).is_err());
        assert!(embed(&i2, 2, (2, 4)).is_err());
        assert!(embed(&CMatrix::<f64>::identity(3), 2, (0, 1)).is_err());
    }

    #[test]
    fn window_validation() {
        assert!(SearchWindow::new((0.0, 0.2), (0.0, 0.1)).validate().is_err());
        assert!(SearchWindow::new((0.1, 0.2), (0.0, 0.99)).validate().is_err());
        assert!(SearchWindow::new((0.1, 0.2), (0.0, 0.0)).validate().is_ok());
        assert_eq!(SearchWindow::new((0.1, 0.2), (0.0, 0.0)).nb, 1);
    }
}
