//! Symmetric-passage evolution operator, gate-error metrics and the
//! small-error scaling of the gate error.
//!
//! A passage that crosses the avoided crossing twice produces
//!
//! ```text
//! U00 = (1-p) e^{2i a00} + p e^{2i a01}        U11 = conj(U00)
//! U01 = U10 = -2i sqrt((1-p) p) sin(a00 - a01)
//! ```
//!
//! with `p` the single-passage transition probability. Only two real degrees
//! of freedom of `U` are visible (the phase of `U00` and the signed `U01`), so
//! `p` cannot be read back from `U` alone. The fit below pins `p` to a
//! supplied estimate and solves for the phases.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::model::ModelSpec;
use crate::propagator::{full_evolution_operator, half_passage_p, IntegratorSettings};
use crate::scalar::{wrap_angle, Real};
use crate::simplex::{self, SimplexOptions};
use crate::trajectory::Trajectory;

/// Fit residual above which a unitary is reported as not having the
/// symmetric-passage shape.
pub const FORM_MISMATCH_RESIDUAL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZhuNakamuraForm<T> {
    pub p: T,
    pub alpha00: T,
    pub alpha01: T,
    /// Max-norm distance between the generated unitary and the fitted source.
    pub fit_residual: T,
}

impl<T: Real> ZhuNakamuraForm<T> {
    pub fn new(p: T, alpha00: T, alpha01: T) -> Result<Self> {
        if !(p >= T::zero() && p <= T::one()) {
            return Err(Error::Domain {
                what: "p",
                value: p.to_f64_lossy(),
                domain: "[0, 1]",
            });
        }
        Ok(Self {
            p,
            alpha00,
            alpha01,
            fit_residual: T::zero(),
        })
    }

    pub fn unitary(&self) -> CMatrix<T> {
        zn_unitary(self)
    }

    pub fn transition_probability(&self) -> T {
        transition_probability(self)
    }

    /// `true` when the fit left a residual above [`FORM_MISMATCH_RESIDUAL`].
    pub fn is_mismatch(&self) -> bool {
        self.fit_residual > T::lit(FORM_MISMATCH_RESIDUAL)
    }

    /// Phase difference `a00 - a01`.
    pub fn delta(&self) -> T {
        self.alpha00 - self.alpha01
    }

    /// All `(a00, a01)` pairs that generate the same unitary at this `p`.
    ///
    /// Covers the second `asin` branch `delta -> pi - delta` and the `pi`
    /// shifts of either phase that leave `U` unchanged.
    pub fn representations(&self) -> Vec<(T, T)> {
        let pi = T::PI();
        let (a, b) = (self.alpha00, self.alpha01);
        let delta = a - b;
        let sum = a + b;
        let one_minus_2p = T::one() - self.p - self.p;
        let z1 = Complex::new(delta.cos(), one_minus_2p * delta.sin());
        let z2 = Complex::new(-delta.cos(), one_minus_2p * delta.sin());
        let sum2 = if z1.norm() > T::epsilon() && z2.norm() > T::epsilon() {
            sum + z1.arg() - z2.arg()
        } else {
            sum
        };
        let delta2 = pi - delta;
        let branches = [(a, b), ((sum2 + delta2) / T::lit(2.0), (sum2 - delta2) / T::lit(2.0))];
        let reference = self.unitary();
        let tol = T::lit(1e-9).max(T::epsilon().sqrt());
        let mut out: Vec<(T, T)> = Vec::new();
        for (x, y) in branches {
            for (sx, sy) in [(T::zero(), T::zero()), (pi, pi), (pi, T::zero()), (T::zero(), pi)] {
                let cand = (wrap_angle(x + sx), wrap_angle(y + sy));
                let f = ZhuNakamuraForm {
                    alpha00: cand.0,
                    alpha01: cand.1,
                    ..*self
                };
                let fresh = out
                    .iter()
                    .all(|o| wrap_angle(o.0 - cand.0).abs() > tol || wrap_angle(o.1 - cand.1).abs() > tol);
                if fresh && f.unitary().max_abs_diff(&reference) <= tol {
                    out.push(cand);
                }
            }
        }
        out
    }
}

/// Evolution operator of the symmetric-passage form.
pub fn zn_unitary<T: Real>(form: &ZhuNakamuraForm<T>) -> CMatrix<T> {
    let two = T::lit(2.0);
    let p = form.p;
    let e0 = Complex::from_polar(T::one(), two * form.alpha00);
    let e1 = Complex::from_polar(T::one(), two * form.alpha01);
    let diag = e0 * (T::one() - p) + e1 * p;
    let off = Complex::new(
        T::zero(),
        -two * ((T::one() - p) * p).sqrt() * form.delta().sin(),
    );
    CMatrix::from_2x2([[diag, off], [off, diag.conj()]])
}

/// `4 (1-p) p sin^2(a00 - a01)`, the population moved from `|0>` to `|1>`.
pub fn transition_probability<T: Real>(form: &ZhuNakamuraForm<T>) -> T {
    let s = form.delta().sin();
    T::lit(4.0) * (T::one() - form.p) * form.p * s * s
}

/// Inverts the symmetric-passage form for a 2x2 unitary.
///
/// `p` is fixed at `p_init` when that value can reproduce `|U01|`, otherwise
/// at the nearest value that can. The phases come from the closed-form
/// inversion on both `asin` branches, then a simplex polish on the max-norm
/// residual. Phases are reported in `(-pi, pi]`.
pub fn fit_zn_form<T: Real>(u: &CMatrix<T>, p_init: T) -> Result<ZhuNakamuraForm<T>> {
    if u.dim() != 2 {
        return Err(Error::DimensionMismatch {
            left: u.dim(),
            right: 2,
        });
    }
    let defect = u.unitarity_defect();
    if !(defect <= T::lit(1e-6).max(T::epsilon() * T::lit(100.0))) {
        return Err(Error::NotUnitary {
            defect: defect.to_f64_lossy(),
        });
    }
    let half = T::lit(0.5);
    let u00 = (u[(0, 0)] + u[(1, 1)].conj()) * half;
    let off = (u[(0, 1)] + u[(1, 0)]) * half;
    let sigma = (-off.im).max(-T::one()).min(T::one());

    let mut p = p_init.max(T::zero()).min(T::one());
    if T::lit(4.0) * p * (T::one() - p) < sigma * sigma {
        let root = (T::one() - sigma * sigma).max(T::zero()).sqrt();
        let lo = (T::one() - root) * half;
        let hi = (T::one() + root) * half;
        p = if (p - lo).abs() <= (p - hi).abs() { lo } else { hi };
    }
    let k2 = T::lit(2.0) * (p * (T::one() - p)).sqrt();
    let x = if k2 > T::zero() {
        (sigma / k2).max(-T::one()).min(T::one())
    } else {
        T::zero()
    };
    let d1 = x.asin();
    let mut best: Option<ZhuNakamuraForm<T>> = None;
    for delta in [d1, T::PI() - d1] {
        let zc = Complex::new(delta.cos(), (T::one() - p - p) * delta.sin());
        let sum = if zc.norm() > T::epsilon() && u00.norm() > T::epsilon() {
            u00.arg() - zc.arg()
        } else {
            u00.arg()
        };
        let mut form = ZhuNakamuraForm {
            p,
            alpha00: (sum + delta) * half,
            alpha01: (sum - delta) * half,
            fit_residual: T::zero(),
        };
        form.fit_residual = zn_unitary(&form).max_abs_diff(u);
        if best.map_or(true, |b| form.fit_residual < b.fit_residual) {
            best = Some(form);
        }
    }
    let mut form = best.expect("two branches evaluated");

    if form.fit_residual > T::epsilon() * T::lit(16.0) {
        let objective = |x: &[T]| {
            let f = ZhuNakamuraForm {
                p,
                alpha00: x[0],
                alpha01: x[1],
                fit_residual: T::zero(),
            };
            zn_unitary(&f).max_abs_diff(u)
        };
        let step = T::lit(1e-3);
        let r = simplex::minimize(
            objective,
            &[form.alpha00, form.alpha01],
            &[step, step],
            &SimplexOptions {
                max_evals: 800,
                f_tol: T::epsilon(),
                x_tol: T::epsilon().sqrt() * T::lit(1e-4),
            },
        );
        if r.fx < form.fit_residual {
            form.alpha00 = r.x[0];
            form.alpha01 = r.x[1];
            form.fit_residual = r.fx;
        }
    }
    form.alpha00 = wrap_angle(form.alpha00);
    form.alpha01 = wrap_angle(form.alpha01);
    Ok(form)
}

/// Largest per-phase distance between a fitted form and target phases,
/// minimized over every representation of the target at the fitted `p`.
pub fn phase_distance<T: Real>(form: &ZhuNakamuraForm<T>, alpha00: T, alpha01: T) -> T {
    let target = ZhuNakamuraForm {
        alpha00,
        alpha01,
        ..*form
    };
    target
        .representations()
        .into_iter()
        .map(|(a, b)| {
            wrap_angle(form.alpha00 - a)
                .abs()
                .max(wrap_angle(form.alpha01 - b).abs())
        })
        .fold(T::infinity(), T::min)
}

/// Distance of `a00 - a01` from `target` modulo `period`.
pub fn delta_distance<T: Real>(form: &ZhuNakamuraForm<T>, target: T, period: T) -> T {
    let d = (form.delta() - target) % period;
    let d = if d < T::zero() { d + period } else { d };
    d.min(period - d)
}

/// The representation of `form` nearest to `reference`, unwrapped onto it.
pub fn nearest_representation<T: Real>(form: &ZhuNakamuraForm<T>, reference: (T, T)) -> (T, T) {
    form.representations()
        .into_iter()
        .map(|(a, b)| {
            let da = wrap_angle(a - reference.0);
            let db = wrap_angle(b - reference.1);
            (da.abs().max(db.abs()), (reference.0 + da, reference.1 + db))
        })
        .fold((T::infinity(), reference), |acc, c| if c.0 < acc.0 { c } else { acc })
        .1
}

/// Gate error of an approximate unitary `U_a` with respect to `U_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateErrorReport<T> {
    /// `tr(P)` with `P = D^dagger D`, `D = U_a - U_t`.
    pub trace_bound: T,
    /// Largest eigenvalue of `P`, an upper bound on the error probability.
    pub d_max: T,
    /// `1 - |tr(U_a^dagger U_t)| / dim`.
    pub phase_invariant_infidelity: T,
}

/// Largest eigenvalue of a Hermitian positive semidefinite matrix.
///
/// Closed form for 2x2; power iteration with a Rayleigh quotient otherwise.
pub fn largest_eigenvalue_psd<T: Real>(p: &CMatrix<T>) -> T {
    let n = p.dim();
    let half = T::lit(0.5);
    if n == 1 {
        return p[(0, 0)].re;
    }
    if n == 2 {
        let a = p[(0, 0)].re;
        let d = p[(1, 1)].re;
        let b = p[(0, 1)];
        let h = (a - d) * half;
        return ((a + d) * half + (h * h + b.norm_sqr()).sqrt()).max(T::zero());
    }
    let mut x: Vec<Complex<T>> = (0..n)
        .map(|i| {
            let fi = T::from_usize(i).unwrap();
            Complex::new(T::one() + T::lit(0.137) * fi, T::lit(0.071) * fi * fi)
        })
        .collect();
    let mut lambda = T::zero();
    let mut stable = 0;
    for _ in 0..50_000 {
        let norm = x.iter().fold(T::zero(), |s, c| s + c.norm_sqr()).sqrt();
        if norm == T::zero() {
            return T::zero();
        }
        x.iter_mut().for_each(|c| *c = *c / norm);
        let y = p.apply(&x);
        let rq = x
            .iter()
            .zip(&y)
            .fold(Complex::new(T::zero(), T::zero()), |s, (a, b)| s + a.conj() * *b)
            .re;
        if (rq - lambda).abs() <= T::epsilon() * T::lit(4.0) * rq.abs().max(T::epsilon()) {
            stable += 1;
            if stable >= 3 {
                return rq.max(T::zero());
            }
        } else {
            stable = 0;
        }
        lambda = rq;
        x = y;
    }
    lambda.max(T::zero())
}

pub fn gate_error<T: Real>(ua: &CMatrix<T>, ut: &CMatrix<T>) -> Result<GateErrorReport<T>> {
    let d = ua.checked_sub(ut)?;
    let p = &d.adjoint() * &d;
    let trace_bound = p.trace().re.max(T::zero());
    let d_max = largest_eigenvalue_psd(&p).min(trace_bound);
    let dim = T::from_usize(ua.dim()).unwrap();
    let overlap = (&ua.adjoint() * ut).trace().norm() / dim;
    Ok(GateErrorReport {
        trace_bound,
        d_max,
        phase_invariant_infidelity: T::one() - overlap,
    })
}

/// `<xi|xi>` for `|xi> = (U_a - U_t)|psi>`.
pub fn state_error_norm<T: Real>(ua: &CMatrix<T>, ut: &CMatrix<T>, psi: &[Complex<T>]) -> T {
    let a = ua.apply(psi);
    let t = ut.apply(psi);
    a.iter().zip(&t).fold(T::zero(), |s, (x, y)| s + (*x - *y).norm_sqr())
}

/// Error probability for one input state: the squared norm of the part of
/// `(U_a - U_t)|psi>` orthogonal to the target output `U_t|psi>`.
pub fn state_error_probability<T: Real>(ua: &CMatrix<T>, ut: &CMatrix<T>, psi: &[Complex<T>]) -> T {
    let a = ua.apply(psi);
    let t = ut.apply(psi);
    let xi: Vec<Complex<T>> = a.iter().zip(&t).map(|(x, y)| *x - *y).collect();
    let tn = t.iter().fold(T::zero(), |s, c| s + c.norm_sqr());
    if tn == T::zero() {
        return xi.iter().fold(T::zero(), |s, c| s + c.norm_sqr());
    }
    let proj = t
        .iter()
        .zip(&xi)
        .fold(Complex::new(T::zero(), T::zero()), |s, (ti, xi)| s + ti.conj() * *xi)
        / tn;
    xi.iter()
        .zip(&t)
        .fold(T::zero(), |s, (x, ti)| s + (*x - *ti * proj).norm_sqr())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    V,
    B,
}

impl Axis {
    fn shift<T: Real>(self, v0: T, b0: T, eps: T) -> (T, T) {
        match self {
            Axis::V => (v0 + eps, b0),
            // U depends on b only through b^2.
            Axis::B => (v0, (b0 + eps).abs()),
        }
    }
}

/// What the perturbed gate is compared against.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalingReference<T> {
    /// The unperturbed operator `U(v0, b0)`.
    Nominal,
    /// A fixed target; points within 10x of its baseline error are dropped.
    Target(CMatrix<T>),
}

/// Leading-order gate-error coefficient in terms of the linear-response
/// coefficients, for gates where one is known in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalingLaw {
    /// `2 (c0 - c1)^2 + 8 cp^2`
    Not,
    /// `8 (cp^2 - p (c0^2 - c1^2) + c0^2)`
    Z,
    /// `8 cp^2 + 4 c0^2 + 4 c1^2`
    T,
    Unknown,
}

impl ScalingLaw {
    pub fn predicted_prefactor<T: Real>(self, c: &PerturbationCoefficients<T>, p: T) -> Option<T> {
        let (cp, c0, c1) = (c.c_p, c.c_0, c.c_1);
        match self {
            ScalingLaw::Not => Some(T::lit(2.0) * (c0 - c1) * (c0 - c1) + T::lit(8.0) * cp * cp),
            ScalingLaw::Z => Some(T::lit(8.0) * (cp * cp - p * (c0 * c0 - c1 * c1) + c0 * c0)),
            ScalingLaw::T => Some(T::lit(8.0) * cp * cp + T::lit(4.0) * (c0 * c0 + c1 * c1)),
            ScalingLaw::Unknown => None,
        }
    }
}

/// First-order response of `(p, a00, a01)` to a parameter error `eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationCoefficients<T> {
    pub axis: Axis,
    pub c_p: T,
    pub c_0: T,
    pub c_1: T,
    /// Central-difference step used for the reported values.
    pub step: T,
    /// Largest change of a coefficient when the step is halved, relative to
    /// the largest coefficient.
    pub step_halving_change: T,
    /// Half-passage `p` at the nominal point.
    pub p: T,
}

fn zn_at<T: Real>(
    model: &ModelSpec<T>,
    v: T,
    b: T,
    settings: &IntegratorSettings<T>,
) -> Result<(T, ZhuNakamuraForm<T>)> {
    let traj = Trajectory::new(v, b)?;
    let p = half_passage_p(model, &traj, settings)?;
    let u = full_evolution_operator(model, &traj, settings)?;
    Ok((p, fit_zn_form(&u.unitary, p)?))
}

/// Central-difference response coefficients of `(p, a00, a01)` along `axis`.
pub fn perturbation_coefficients<T: Real>(
    model: &ModelSpec<T>,
    v0: T,
    b0: T,
    axis: Axis,
    step: T,
    settings: &IntegratorSettings<T>,
) -> Result<PerturbationCoefficients<T>> {
    let (p0, f0) = zn_at(model, v0, b0, settings)?;
    let nominal = (f0.alpha00, f0.alpha01);
    let central = |h: T| -> Result<(T, T, T)> {
        let (vp, bp) = axis.shift(v0, b0, h);
        let (vm, bm) = axis.shift(v0, b0, -h);
        let (pp, fp) = zn_at(model, vp, bp, settings)?;
        let (pm, fm) = zn_at(model, vm, bm, settings)?;
        let ap = nearest_representation(&fp, nominal);
        let am = nearest_representation(&fm, nominal);
        let two_h = h + h;
        Ok(((pp - pm) / two_h, (ap.0 - am.0) / two_h, (ap.1 - am.1) / two_h))
    };
    let coarse = central(step)?;
    let fine = central(step * T::lit(0.5))?;
    // Relative to the size of the coefficient vector, so a coefficient that
    // is zero up to noise does not dominate.
    let scale = [coarse.0, coarse.1, coarse.2, fine.0, fine.1, fine.2]
        .iter()
        .fold(T::epsilon(), |m, c| m.max(c.abs()));
    let change = (coarse.0 - fine.0)
        .abs()
        .max((coarse.1 - fine.1).abs())
        .max((coarse.2 - fine.2).abs())
        / scale;
    Ok(PerturbationCoefficients {
        axis,
        c_p: fine.0,
        c_0: fine.1,
        c_1: fine.2,
        step: step * T::lit(0.5),
        step_halving_change: change,
        p: p0,
    })
}

/// Power-law fit `d_max ≈ prefactor * eps^slope` of the gate error under a
/// parameter error along one axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit<T> {
    pub axis: Axis,
    pub eps: Vec<T>,
    pub d_max: Vec<T>,
    /// Perturbations dropped because their error sat too close to the floor.
    pub excluded_eps: Vec<T>,
    pub baseline_d_max: T,
    pub slope: T,
    pub prefactor: T,
    pub r_squared: T,
    pub coefficients: PerturbationCoefficients<T>,
    /// Prefactor implied by the closed-form law and the measured coefficients.
    pub predicted_prefactor: Option<T>,
    /// `predicted_prefactor / prefactor`.
    pub law_ratio: Option<T>,
}

impl<T: Real> ScalingFit<T> {
    /// `true` when the closed-form law and the fit differ by more than 3x.
    pub fn law_disagrees(&self) -> bool {
        self.law_ratio
            .map_or(false, |r| !(r >= T::lit(1.0 / 3.0) && r <= T::lit(3.0)))
    }
}

/// Minimum coefficient of determination accepted for a power-law fit.
pub const MIN_R_SQUARED: f64 = 0.99;

#[allow(clippy::too_many_arguments)]
pub fn error_scaling<T: Real>(
    model: &ModelSpec<T>,
    v0: T,
    b0: T,
    reference: &ScalingReference<T>,
    axis: Axis,
    eps_list: &[T],
    law: ScalingLaw,
    settings: &IntegratorSettings<T>,
) -> Result<ScalingFit<T>> {
    if eps_list.is_empty() {
        return Err(Error::Empty("eps_list"));
    }
    let nominal = full_evolution_operator(model, &Trajectory::new(v0, b0)?, settings)?.unitary;
    let target = match reference {
        ScalingReference::Nominal => nominal.clone(),
        ScalingReference::Target(u) => u.clone(),
    };
    let baseline = gate_error(&nominal, &target)?.d_max;
    let errors: Vec<Result<T>> = eps_list
        .par_iter()
        .map(|&eps| {
            let (v, b) = axis.shift(v0, b0, eps);
            let u = full_evolution_operator(model, &Trajectory::new(v, b)?, settings)?;
            Ok(gate_error(&u.unitary, &target)?.d_max)
        })
        .collect();
    let floor = baseline * T::lit(10.0);
    let mut eps = Vec::new();
    let mut d_max = Vec::new();
    let mut excluded = Vec::new();
    for (&e, d) in eps_list.iter().zip(errors) {
        let d = d?;
        if d > floor && d > T::zero() {
            eps.push(e);
            d_max.push(d);
        } else {
            excluded.push(e);
        }
    }
    if eps.len() < 2 {
        return Err(Error::ScalingFit {
            r_squared: f64::NAN,
            points: eps.len(),
        });
    }
    let (slope, intercept, r_squared) = log_log_fit(&eps, &d_max);
    if !(r_squared >= T::lit(MIN_R_SQUARED)) {
        return Err(Error::ScalingFit {
            r_squared: r_squared.to_f64_lossy(),
            points: eps.len(),
        });
    }
    let mut sorted = eps_list.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let step = sorted[sorted.len() / 2].abs();
    let coefficients = perturbation_coefficients(model, v0, b0, axis, step, settings)?;
    let predicted_prefactor = law.predicted_prefactor(&coefficients, coefficients.p);
    let prefactor = intercept.exp();
    Ok(ScalingFit {
        axis,
        eps,
        d_max,
        excluded_eps: excluded,
        baseline_d_max: baseline,
        slope,
        prefactor,
        r_squared,
        coefficients,
        predicted_prefactor,
        law_ratio: predicted_prefactor.map(|p| p / prefactor),
    })
}

/// Least-squares line through `(ln x, ln y)`: `(slope, intercept, R^2)`.
pub fn log_log_fit<T: Real>(x: &[T], y: &[T]) -> (T, T, T) {
    let n = T::from_usize(x.len()).unwrap();
    let lx: Vec<T> = x.iter().map(|v| v.abs().ln()).collect();
    let ly: Vec<T> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().fold(T::zero(), |s, &v| s + v) / n;
    let my = ly.iter().fold(T::zero(), |s, &v| s + v) / n;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in lx.iter().zip(&ly) {
        sxy = sxy + (a - mx) * (b - my);
        sxx = sxx + (a - mx) * (a - mx);
        syy = syy + (b - my) * (b - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == T::zero() { T::one() } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn form(p: f64, a: f64, b: f64) -> ZhuNakamuraForm<f64> {
        ZhuNakamuraForm::new(p, a, b).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn adiabatic_phase_gate() {
        let u = zn_unitary(&form(0.0, 0.3, -1.2));
        assert!((u[(0, 0)] - Complex::from_polar(1.0, 0.6)).norm() < 1e-15);
        assert!((u[(1, 1)] - Complex::from_polar(1.0, -0.6)).norm() < 1e-15);
        assert_eq!(u[(0, 1)].norm(), 0.0);
    }

    #[test]
    fn not_like_form() {
        let u = zn_unitary(&form(0.5, 0.0, -FRAC_PI_2));
        assert!((u[(0, 1)].norm() - 1.0).abs() < 1e-15);
        assert!(u[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn z_gate_for_any_p() {
        let iz = CMatrix::from_2x2([[c(0., 1.), c(0., 0.)], [c(0., 0.), c(0., -1.)]]);
        for i in 0..=20 {
            let p = i as f64 / 20.0;
            let u = zn_unitary(&form(p, FRAC_PI_4, 5.0 * FRAC_PI_4));
            assert!(u.max_abs_diff(&iz) < 1e-12, "p={p}");
        }
    }

    #[test]
    fn t_gate_form_is_diagonal_for_any_p() {
        let u0 = zn_unitary(&form(0.0, 15.0 * PI / 16.0, -PI / 16.0));
        for i in 0..=20 {
            let p = i as f64 / 20.0;
            let u = zn_unitary(&form(p, 15.0 * PI / 16.0, -PI / 16.0));
            assert!(u[(0, 1)].norm() < 1e-12);
            assert!(u.max_abs_diff(&u0) < 1e-12);
        }
        assert!((u0[(0, 0)] - Complex::from_polar(1.0, -PI / 8.0)).norm() < 1e-12);
    }

    #[test]
    fn hadamard_phases_give_ih() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let ih = CMatrix::from_2x2([[c(0., s), c(0., s)], [c(0., s), c(0., -s)]]);
        let u = zn_unitary(&form(0.5, 3.0 * PI / 8.0, -7.0 * PI / 8.0));
        assert!(u.max_abs_diff(&ih) < 1e-12);
    }

    #[test]
    fn transition_probability_values() {
        assert!((transition_probability(&form(0.5, FRAC_PI_2, 0.0)) - 1.0).abs() < 1e-15);
        assert_eq!(transition_probability(&form(0.0, 1.0, 0.0)), 0.0);
        assert_eq!(transition_probability(&form(1.0, 1.0, 0.0)), 0.0);
        assert!((transition_probability(&form(0.25, FRAC_PI_2, 0.0)) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn fit_round_trip_example() {
        let f = form(0.3, 0.7, -1.1);
        let fit = fit_zn_form(&f.unitary(), 0.3).unwrap();
        assert!(fit.fit_residual <= 1e-10);
        assert!((fit.p - 0.3).abs() < 1e-12);
        assert!(phase_distance(&fit, 0.7, -1.1) < 1e-10);
        assert!(!fit.is_mismatch());
    }

    #[test]
    fn fit_moves_infeasible_p() {
        // |U01| = 1 needs p = 1/2.
        let f = form(0.5, FRAC_PI_2, 0.0);
        let fit = fit_zn_form(&f.unitary(), 0.1).unwrap();
        assert!((fit.p - 0.5).abs() < 1e-7);
        assert!(fit.fit_residual < 1e-7);
    }

    #[test]
    fn fit_flags_non_symmetric_unitaries() {
        // diag(1, i) has U11 != conj(U00).
        let u = CMatrix::diag(&[c(1., 0.), c(0., 1.)]);
        let fit = fit_zn_form(&u, 0.3).unwrap();
        assert!(fit.is_mismatch(), "{}", fit.fit_residual);
        let bad = CMatrix::diag(&[c(1., 0.), c(2., 0.)]);
        assert!(matches!(fit_zn_form(&bad, 0.3), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn delta_distance_wraps() {
        let f = form(0.5, 0.1, 0.1 + FRAC_PI_2 + 1e-3);
        assert!((delta_distance(&f, FRAC_PI_2, PI) - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn gate_error_identical_is_zero() {
        let u = form(0.3, 0.7, -1.1).unitary();
        let r = gate_error(&u, &u).unwrap();
        assert_eq!((r.trace_bound, r.d_max), (0.0, 0.0));
        assert!(r.phase_invariant_infidelity.abs() < 1e-15);
    }

    #[test]
    fn gate_error_global_phase() {
        let u = form(0.3, 0.7, -1.1).unitary();
        let w = u.scale(Complex::from_polar(1.0, 0.2));
        let r = gate_error(&w, &u).unwrap();
        let expect = 2.0 - 2.0 * 0.2f64.cos();
        assert!((r.d_max - expect).abs() < 1e-14);
        assert!((r.trace_bound - 2.0 * expect).abs() < 1e-14);
        assert!(r.phase_invariant_infidelity.abs() < 1e-14);
        // Error confined to the target output direction is invisible per state.
        let psi = [c(0.6, 0.0), c(0.0, 0.8)];
        assert!(state_error_probability(&w, &u, &psi) < 1e-14);
        assert!((state_error_norm(&w, &u, &psi) - expect).abs() < 1e-14);
    }

    #[test]
    fn power_method_matches_closed_form_on_embedded_blocks() {
        let a = form(0.31, 0.4, -0.9).unitary();
        let b = form(0.5, 0.0, -FRAC_PI_2).unitary();
        let r2 = gate_error(&a, &b).unwrap();
        let mut a4 = CMatrix::identity(4);
        let mut b4 = CMatrix::identity(4);
        for i in 0..2 {
            for j in 0..2 {
                a4[(2 + i, 2 + j)] = a[(i, j)];
                b4[(2 + i, 2 + j)] = b[(i, j)];
            }
        }
        let r4 = gate_error(&a4, &b4).unwrap();
        assert!((r2.d_max - r4.d_max).abs() < 1e-12);
        assert!((r2.trace_bound - r4.trace_bound).abs() < 1e-12);
    }

    #[test]
    fn log_log_fit_recovers_power_law() {
        let x = [1e-4, 3e-4, 1e-3];
        let y: Vec<f64> = x.iter().map(|e| 40.0 * e * e).collect();
        let (s, i, r2) = log_log_fit(&x, &y);
        assert!((s - 2.0).abs() < 1e-12);
        assert!((i.exp() - 40.0).abs() < 1e-9);
        assert!((r2 - 1.0).abs() < 1e-12);
    }
}
