//! Straight-line collision geometry `s(z) = sqrt(z^2 + b^2)` and first-order
//! diagnostics of a passage through the avoided crossing.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::numeric;
use crate::ode::{self, AdaptiveOptions};
use crate::scalar::Real;

/// A passage `s: 1 -> b -> 1` at speed `v` with impact parameter `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    pub v: T,
    pub b: T,
    pub z_min: T,
    pub z_max: T,
    /// `2T` with `T = sqrt(1 - b^2) / v`.
    pub total_time: T,
}

impl<T: Real> Trajectory<T> {
    pub fn new(v: T, b: T) -> Result<Self> {
        if !(v > T::zero()) || !v.is_finite() {
            return Err(Error::Domain {
                what: "v",
                value: v.to_f64_lossy(),
                domain: "(0, inf)",
            });
        }
        if !(b >= T::zero()) {
            return Err(Error::Domain {
                what: "b",
                value: b.to_f64_lossy(),
                domain: "[0, 1)",
            });
        }
        if b >= T::one() {
            return Err(Error::DegenerateTrajectory { b: b.to_f64_lossy() });
        }
        let z_max = (T::one() - b * b).sqrt();
        Ok(Self {
            v,
            b,
            z_min: -z_max,
            z_max,
            total_time: (z_max + z_max) / v,
        })
    }

    /// Half the passage time, `T`.
    pub fn half_time(&self) -> T {
        self.z_max / self.v
    }

    /// `(s, ds/dz)` at `z`. `ds/dz` is taken as 0 where `s = 0`.
    pub fn geometry(&self, z: T) -> Result<(T, T)> {
        if !(z >= self.z_min && z <= self.z_max) {
            return Err(Error::Domain {
                what: "z",
                value: z.to_f64_lossy(),
                domain: "[z_min, z_max]",
            });
        }
        Ok(self.geometry_unchecked(z))
    }

    #[inline]
    pub(crate) fn geometry_unchecked(&self, z: T) -> (T, T) {
        let s = (z * z + self.b * self.b).sqrt().min(T::one());
        let ds = if s == T::zero() { T::zero() } else { z / s };
        (s, ds)
    }
}

/// `W(s(z)) * ds/dz`, the transition drive in the z-picture. Zero at `s = 0`.
#[inline]
pub(crate) fn radial_drive<T: Real>(model: &ModelSpec<T>, traj: &Trajectory<T>, z: T) -> (T, T, T) {
    let (s, ds) = traj.geometry_unchecked(z);
    let (e0, e1, w) = model.local_terms(s);
    (e0, e1, w * ds)
}

/// First-order estimate of the transition population
/// `| ∫ W (z/s) exp((i/v) ∫_{z_min}^z (E1 - E0) dz') dz |^2`.
///
/// The inner phase integral is carried as an extra ODE component, so the
/// whole estimate is a single adaptive integration split at `z = 0`.
pub fn eta<T: Real>(model: &ModelSpec<T>, traj: &Trajectory<T>) -> Result<T> {
    let opts = AdaptiveOptions {
        rel_tol: T::lit(1e-10).max(T::epsilon() * T::lit(100.0)),
        abs_tol: T::lit(1e-12).max(T::epsilon()),
        max_steps: 2_000_000,
    };
    let inv_v = T::one() / traj.v;
    let rhs = |z: T, y: &[T], dy: &mut [T]| {
        let (e0, e1, drive) = radial_drive(model, traj, z);
        let (sin, cos) = (y[0] * inv_v).sin_cos();
        dy[0] = e1 - e0;
        dy[1] = drive * cos;
        dy[2] = drive * sin;
    };
    let mut y = [T::zero(); 3];
    for (a, b) in [(traj.z_min, T::zero()), (T::zero(), traj.z_max)] {
        ode::dopri5(rhs, a, b, &mut y, &opts, |_, _| {}).map_err(|e| match e {
            Error::StepLimit { .. } | Error::StepUnderflow { .. } => Error::Quadrature {
                achieved: opts.rel_tol.to_f64_lossy(),
            },
            other => other,
        })?;
    }
    Ok(Complex::new(y[1], y[2]).norm_sqr())
}

/// Adiabatic-criterion quantities along a passage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticityReport<T> {
    pub delta_e_min: T,
    pub d_max: T,
    pub epsilon_ratio: T,
    pub massey_xi: T,
    pub interaction_length_a: T,
}

/// Massey parameter above which a passage is classed as adiabatic.
pub const MASSEY_ADIABATIC_THRESHOLD: f64 = 5.0;

impl<T: Real> AdiabaticityReport<T> {
    pub fn is_adiabatic(&self) -> bool {
        self.massey_xi >= T::lit(MASSEY_ADIABATIC_THRESHOLD)
    }
}

const DIAG_GRID: usize = 4001;

fn grid_argmax<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let xs = numeric::linspace(a, b, DIAG_GRID);
    let (mut bi, mut bv) = (0, T::neg_infinity());
    for (i, &x) in xs.iter().enumerate() {
        let v = f(x);
        if v > bv {
            bi = i;
            bv = v;
        }
    }
    let lo = xs[bi.saturating_sub(1)];
    let hi = xs[(bi + 1).min(xs.len() - 1)];
    let (x, negv) = numeric::golden_min(|x| -f(x), lo, hi, T::epsilon().sqrt() * T::lit(1e-2));
    if -negv >= bv {
        (x, -negv)
    } else {
        (xs[bi], bv)
    }
}

/// Measure of `{x in [a, b] : f(x) >= level}`, crossings located by bisection.
fn superlevel_measure<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T, level: T) -> T {
    let xs = numeric::linspace(a, b, DIAG_GRID);
    let above: Vec<bool> = xs.iter().map(|&x| f(x) >= level).collect();
    let crossing = |mut lo: T, mut hi: T, lo_above: bool| {
        for _ in 0..100 {
            let mid = (lo + hi) * T::lit(0.5);
            if (f(mid) >= level) == lo_above {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo + hi) * T::lit(0.5)
    };
    let mut total = T::zero();
    let mut start = if above[0] { Some(a) } else { None };
    for i in 1..xs.len() {
        if above[i] != above[i - 1] {
            let x = crossing(xs[i - 1], xs[i], above[i - 1]);
            if above[i] {
                start = Some(x);
            } else if let Some(s0) = start.take() {
                total = total + (x - s0);
            }
        }
    }
    if let Some(s0) = start {
        total = total + (b - s0);
    }
    total
}

/// Evaluates the adiabatic criterion quantities along the passage:
/// minimum gap, largest `|<phi0| dH/dt |phi1>|`, their ratio, and the Massey
/// parameter `a dE_min / v` where `a` is the measure of the z-region in which
/// `|W(s(z)) ds/dz|` is at least half its maximum.
pub fn adiabaticity<T: Real>(model: &ModelSpec<T>, traj: &Trajectory<T>) -> Result<AdiabaticityReport<T>> {
    let gap = |s: T| {
        let (e0, e1, _) = model.local_terms(s);
        e1 - e0
    };
    let (_, neg_min_gap) = grid_argmax(&|s| -gap(s), traj.b, T::one());
    let delta_e_min = -neg_min_gap;

    // The integrand is even in z, so the half path [0, z_max] suffices.
    let coupling_rate = |z: T| {
        let (s, ds) = traj.geometry_unchecked(z);
        let fr = match model.eigensystem(s) {
            Ok(fr) => fr,
            Err(_) => return T::zero(),
        };
        let dh = model.hamiltonian_derivative(s).unwrap();
        let (u, w) = (fr.eigvec_lower, fr.eigvec_upper);
        let elem = u[0] * (dh[0][0] * w[0] + dh[0][1] * w[1]) + u[1] * (dh[1][0] * w[0] + dh[1][1] * w[1]);
        (elem * ds * traj.v).abs()
    };
    let (_, d_max) = grid_argmax(&coupling_rate, T::zero(), traj.z_max);

    let drive = |z: T| radial_drive(model, traj, z).2.abs();
    let (_, drive_max) = grid_argmax(&drive, T::zero(), traj.z_max);
    let half_width = if drive_max > T::zero() {
        superlevel_measure(&drive, T::zero(), traj.z_max, drive_max * T::lit(0.5))
    } else {
        T::zero()
    };
    let a = half_width + half_width;

    let epsilon_ratio = if delta_e_min > T::zero() {
        d_max / (delta_e_min * delta_e_min)
    } else {
        T::infinity()
    };
    Ok(AdiabaticityReport {
        delta_e_min,
        d_max,
        epsilon_ratio,
        massey_xi: a * delta_e_min / traj.v,
        interaction_length_a: a,
    })
}
