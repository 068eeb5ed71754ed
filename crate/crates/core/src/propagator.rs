//! Time evolution through the passage.
//!
//! The primary route integrates the adiabatic-basis amplitude equations
//!
//! ```text
//! da0/dz = -i a0 E0(s)/v - a1 (z/s) W(s)
//! da1/dz = -i a1 E1(s)/v + a0 (z/s) W(s)
//! ```
//!
//! from `z_min` to `z_max`, split at `z = 0` where `ds/dz` has a kink for
//! `b = 0`. Because the adiabatic frame equals the computational basis at
//! `s = 1`, the assembled operator is directly the gate in the computational
//! basis.
//!
//! A second route integrates `i dc/dz = H(s(z)) c / v` in the computational
//! basis for an arbitrary real symmetric `H(s)` of any dimension. It is used
//! for embedded multi-qubit blocks and as an independent check on the first.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::model::ModelSpec;
use crate::ode::{self, AdaptiveOptions, OdeStats};
use crate::scalar::Real;
use crate::trajectory::{radial_drive, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    /// Adaptive Dormand-Prince 5(4).
    DormandPrince,
    /// Classical RK4 with a fixed number of steps on each half of the path.
    Rk4 { steps_per_half: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSettings<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_steps: usize,
    pub method: Method,
}

impl<T: Real> Default for IntegratorSettings<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-10),
            abs_tol: T::lit(1e-12),
            max_steps: 10_000_000,
            method: Method::DormandPrince,
        }
    }
}

impl<T: Real> IntegratorSettings<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > T::zero() && self.abs_tol > T::zero()) {
            return Err(Error::Domain {
                what: "tolerance",
                value: self.rel_tol.min(self.abs_tol).to_f64_lossy(),
                domain: "(0, inf)",
            });
        }
        Ok(())
    }

    /// Largest admissible norm drift for adaptive runs.
    pub fn norm_bound(&self) -> T {
        self.rel_tol * T::lit(100.0)
    }

    fn adaptive(&self) -> AdaptiveOptions<T> {
        AdaptiveOptions {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_steps: self.max_steps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationResult<T> {
    /// Amplitudes at the end of the integration.
    pub final_amplitudes: Vec<Complex<T>>,
    /// Largest deviation of the total population from 1 along the path.
    pub norm_drift: T,
    pub steps_taken: usize,
}

/// A full evolution operator with its integration diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionOperator<T> {
    /// Columns are the propagated basis states.
    pub unitary: CMatrix<T>,
    pub norm_drift: T,
    pub steps_taken: usize,
    pub unitarity_defect: T,
}

fn pack<T: Real>(amps: &[Complex<T>]) -> Vec<T> {
    amps.iter().flat_map(|c| [c.re, c.im]).collect()
}

fn unpack<T: Real>(y: &[T]) -> Vec<Complex<T>> {
    y.chunks_exact(2).map(|p| Complex::new(p[0], p[1])).collect()
}

fn check_normalized<T: Real>(amps: &[Complex<T>]) -> Result<()> {
    let norm = amps.iter().fold(T::zero(), |s, c| s + c.norm_sqr());
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(16.0));
    if (norm - T::one()).abs() > tol {
        return Err(Error::NotNormalized { norm: norm.to_f64_lossy() });
    }
    Ok(())
}

/// Runs `rhs` over `segments` (consecutive z-intervals), tracking the norm.
fn integrate_segments<T, F>(
    rhs: F,
    segments: &[(T, T)],
    y: &mut [T],
    settings: &IntegratorSettings<T>,
) -> Result<(T, usize)>
where
    T: Real,
    F: Fn(T, &[T], &mut [T]) + Copy,
{
    settings.validate()?;
    let mut drift = T::zero();
    let mut stats = OdeStats::default();
    for &(a, b) in segments {
        let observe = |_z: T, y: &[T]| {
            let n = y.iter().fold(T::zero(), |s, &x| s + x * x);
            drift = drift.max((n - T::one()).abs());
        };
        let seg = match settings.method {
            Method::DormandPrince => {
                let mut opts = settings.adaptive();
                opts.max_steps = settings.max_steps.saturating_sub(stats.accepted + stats.rejected);
                ode::dopri5(rhs, a, b, y, &opts, observe).map_err(|e| match e {
                    Error::StepLimit { steps: _, z, .. } => Error::StepLimit {
                        steps: settings.max_steps,
                        z,
                        norm_drift: drift.to_f64_lossy(),
                    },
                    other => other,
                })?
            }
            Method::Rk4 { steps_per_half } => ode::rk4(rhs, a, b, y, steps_per_half, observe),
        };
        stats = stats.merge(seg);
    }
    if settings.method == Method::DormandPrince && drift > settings.norm_bound() {
        return Err(Error::Accuracy {
            norm_drift: drift.to_f64_lossy(),
            bound: settings.norm_bound().to_f64_lossy(),
        });
    }
    Ok((drift, stats.accepted))
}

fn path_segments<T: Real>(traj: &Trajectory<T>, z_end: T) -> Vec<(T, T)> {
    let z_end = z_end.min(traj.z_max);
    if z_end <= T::zero() {
        vec![(traj.z_min, z_end)]
    } else {
        vec![(traj.z_min, T::zero()), (T::zero(), z_end)]
    }
}

fn propagate_until<T: Real>(
    model: &ModelSpec<T>,
    traj: &Trajectory<T>,
    settings: &IntegratorSettings<T>,
    initial: [Complex<T>; 2],
    z_end: T,
) -> Result<PropagationResult<T>> {
    check_normalized(&initial)?;
    let inv_v = T::one() / traj.v;
    let rhs = |z: T, y: &[T], dy: &mut [T]| {
        let (e0, e1, k) = radial_drive(model, traj, z);
        let (w0, w1) = (e0 * inv_v, e1 * inv_v);
        // -i a E / v  ->  (im E/v, -re E/v)
        dy[0] = y[1] * w0 - y[2] * k;
        dy[1] = -y[0] * w0 - y[3] * k;
        dy[2] = y[3] * w1 + y[0] * k;
        dy[3] = -y[2] * w1 + y[1] * k;
    };
    let mut y = pack(&initial);
    let (norm_drift, steps_taken) = integrate_segments(rhs, &path_segments(traj, z_end), &mut y, settings)?;
    Ok(PropagationResult {
        final_amplitudes: unpack(&y),
        norm_drift,
        steps_taken,
    })
}

/// Propagates `initial` adiabatic amplitudes over the whole passage.
pub fn propagate<T: Real>(
    model: &ModelSpec<T>,
    traj: &Trajectory<T>,
    settings: &IntegratorSettings<T>,
    initial: [Complex<T>; 2],
) -> Result<PropagationResult<T>> {
    propagate_until(model, traj, settings, initial, traj.z_max)
}

/// Population of `|phi1>` at the turning point `z = 0`, starting from `|0>`:
/// the transition probability of a single passage through the crossing.
pub fn half_passage_p<T: Real>(
    model: &ModelSpec<T>,
    traj: &Trajectory<T>,
    settings: &IntegratorSettings<T>,
) -> Result<T> {
    let r = propagate_until(
        model,
        traj,
        settings,
        [Complex::new(T::one(), T::zero()), Complex::new(T::zero(), T::zero())],
        T::zero(),
    )?;
    Ok(r.final_amplitudes[1].norm_sqr())
}

fn basis<T: Real>(dim: usize, k: usize) -> Vec<Complex<T>> {
    let mut v = vec![Complex::new(T::zero(), T::zero()); dim];
    v[k] = Complex::new(T::one(), T::zero());
    v
}

/// `U(T, -T)` for the passage, assembled from two basis propagations.
pub fn full_evolution_operator<T: Real>(
    model: &ModelSpec<T>,
    traj: &Trajectory<T>,
    settings: &IntegratorSettings<T>,
) -> Result<EvolutionOperator<T>> {
    let mut cols = Vec::with_capacity(2);
    let mut drift = T::zero();
    let mut steps = 0;
    for k in 0..2 {
        let b = basis::<T>(2, k);
        let r = propagate(model, traj, settings, [b[0], b[1]])?;
        drift = drift.max(r.norm_drift);
        steps += r.steps_taken;
        cols.push(r.final_amplitudes);
    }
    let unitary = CMatrix::from_columns(&cols);
    let unitarity_defect = unitary.unitarity_defect();
    Ok(EvolutionOperator {
        unitary,
        norm_drift: drift,
        steps_taken: steps,
        unitarity_defect,
    })
}

/// Propagates computational-basis amplitudes under `i dc/dz = H(s(z)) c / v`.
///
/// `hamiltonian(s, h)` fills the real symmetric `dim x dim` matrix `h`
/// (row-major) at parameter `s`.
pub fn propagate_computational<T, H>(
    hamiltonian: H,
    dim: usize,
    traj: &Trajectory<T>,
    settings: &IntegratorSettings<T>,
    initial: &[Complex<T>],
) -> Result<PropagationResult<T>>
where
    T: Real,
    H: Fn(T, &mut [T]),
{
    if initial.len() != dim {
        return Err(Error::DimensionMismatch {
            left: initial.len(),
            right: dim,
        });
    }
    check_normalized(initial)?;
    let inv_v = T::one() / traj.v;
    let h_buf = std::cell::RefCell::new(vec![T::zero(); dim * dim]);
    let hamiltonian = &hamiltonian;
    let h_buf = &h_buf;
    let rhs = move |z: T, y: &[T], dy: &mut [T]| {
        let (s, _) = traj.geometry_unchecked(z);
        let mut h = h_buf.borrow_mut();
        hamiltonian(s, &mut h);
        for i in 0..dim {
            let (mut re, mut im) = (T::zero(), T::zero());
            for j in 0..dim {
                let hij = h[i * dim + j];
                if hij != T::zero() {
                    re = re + hij * y[2 * j];
                    im = im + hij * y[2 * j + 1];
                }
            }
            // -i (H c) / v
            dy[2 * i] = im * inv_v;
            dy[2 * i + 1] = -re * inv_v;
        }
    };
    let mut y = pack(initial);
    let (norm_drift, steps_taken) = integrate_segments(rhs, &path_segments(traj, traj.z_max), &mut y, settings)?;
    Ok(PropagationResult {
        final_amplitudes: unpack(&y),
        norm_drift,
        steps_taken,
    })
}

/// Evolution operator in the computational basis for an arbitrary real
/// symmetric `H(s)`.
pub fn computational_evolution_operator<T, H>(
    hamiltonian: H,
    dim: usize,
    traj: &Trajectory<T>,
    settings: &IntegratorSettings<T>,
) -> Result<EvolutionOperator<T>>
where
    T: Real,
    H: Fn(T, &mut [T]),
{
    let mut cols = Vec::with_capacity(dim);
    let mut drift = T::zero();
    let mut steps = 0;
    for k in 0..dim {
        let r = propagate_computational(&hamiltonian, dim, traj, settings, &basis(dim, k))?;
        drift = drift.max(r.norm_drift);
        steps += r.steps_taken;
        cols.push(r.final_amplitudes);
    }
    let unitary = CMatrix::from_columns(&cols);
    let unitarity_defect = unitary.unitarity_defect();
    Ok(EvolutionOperator {
        unitary,
        norm_drift: drift,
        steps_taken: steps,
        unitarity_defect,
    })
}

/// `H(s)` of a two-state model as a closure for [`propagate_computational`].
pub fn model_hamiltonian<T: Real>(model: &ModelSpec<T>) -> impl Fn(T, &mut [T]) + '_ {
    move |s, h| {
        let m = model.hamiltonian_at(s).expect("s stays in [0, 1] along a trajectory");
        h[0] = m[0][0];
        h[1] = m[0][1];
        h[2] = m[1][0];
        h[3] = m[1][1];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> [Complex<f64>; 2] {
        [Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)]
    }

    #[test]
    fn rejects_unnormalized_initial_state() {
        let m = ModelSpec::<f64>::default();
        let t = Trajectory::<f64>::new(0.25, 0.0).unwrap();
        let r = propagate(
            &m,
            &t,
            &IntegratorSettings::default(),
            [Complex::new(1.0, 0.0), Complex::new(0.1, 0.0)],
        );
        assert!(matches!(r, Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn step_exhaustion_carries_diagnostics() {
        let m = ModelSpec::<f64>::default();
        let t = Trajectory::<f64>::new(0.01, 0.0).unwrap();
        let s = IntegratorSettings {
            max_steps: 20,
            ..IntegratorSettings::default()
        };
        match propagate(&m, &t, &s, one()) {
            Err(Error::StepLimit { steps, norm_drift, .. }) => {
                assert_eq!(steps, 20);
                assert!(norm_drift.is_finite());
            }
            other => panic!("expected step limit, got {other:?}"),
        }
    }

    #[test]
    fn decoupled_model_only_accumulates_phase() {
        let m = ModelSpec::new(-1.0, 1.0, 0.0, 4, 4).unwrap();
        let v = 0.3;
        let t = Trajectory::<f64>::new(v, 0.2).unwrap();
        let u = full_evolution_operator(&m, &t, &IntegratorSettings::default()).unwrap();
        assert_eq!(u.unitary[(0, 1)], Complex::new(0.0, 0.0));
        assert_eq!(u.unitary[(1, 0)], Complex::new(0.0, 0.0));
        // ∫ E0 dz over the path, E0 = -s^4.
        let int = 2.0 * crate::numeric::integrate(
            |z: f64| -(z * z + 0.04f64).powi(2),
            0.0,
            t.z_max,
            1e-14,
            100,
        )
        .unwrap();
        let expect = Complex::new(0.0, -int / v).exp();
        assert!((u.unitary[(0, 0)] - expect).norm() < 1e-8);
        assert!((u.unitary[(1, 1)] - expect.conj()).norm() < 1e-8);
        let p = half_passage_p(&m, &t, &IntegratorSettings::default()).unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn adiabatic_limit_suppresses_transition() {
        let m = ModelSpec::<f64>::default();
        let t = Trajectory::<f64>::new(0.005, 0.0).unwrap();
        let r = propagate(&m, &t, &IntegratorSettings::default(), one()).unwrap();
        assert!(r.final_amplitudes[1].norm_sqr() < 0.05);
    }

    #[test]
    fn computational_route_matches_adiabatic_route() {
        let m = ModelSpec::<f64>::default();
        let s = IntegratorSettings::default();
        for (v, b) in [(0.2547, 0.0), (0.051, 0.1094), (0.7, 0.5)] {
            let t = Trajectory::<f64>::new(v, b).unwrap();
            let a = full_evolution_operator(&m, &t, &s).unwrap();
            let c = computational_evolution_operator(model_hamiltonian(&m), 2, &t, &s).unwrap();
            assert!(a.unitary.max_abs_diff(&c.unitary) < 1e-7, "v={v} b={b}");
        }
    }

    #[test]
    fn f32_propagation_runs() {
        let m: ModelSpec<f32> = ModelSpec::default();
        let t = Trajectory::new(0.2547f32, 0.0).unwrap();
        let s = IntegratorSettings {
            rel_tol: 1e-5f32,
            abs_tol: 1e-7,
            ..IntegratorSettings::default()
        };
        let u = full_evolution_operator(&m, &t, &s).unwrap();
        assert!(u.unitary[(1, 0)].norm_sqr() > 0.99);
    }
}
