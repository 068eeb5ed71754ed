//! Interpolated two-state Hamiltonian `H(s) = f(s) H0 + g(s) H_W` and its
//! adiabatic frame.
//!
//! `H0 = diag(eps0, eps1)`, `H_W = coupling * (|0><1| + |1><0|)`,
//! `f(s) = s^k`, `g(s) = -(1 - s)^m`.
//!
//! The eigenvectors are written with a mixing angle `theta(s)`:
//! `phi0 = (cos theta, sin theta)`, `phi1 = (-sin theta, cos theta)`, with
//! `2 theta = atan2(-g c, f (eps1 - eps0) / 2)`. Because `f >= 0` and
//! `eps0 < eps1` the atan2 argument never crosses its branch cut, so the frame
//! is continuous on `[0, 1]` and equals the computational basis at `s = 1`.

use num_traits::{pow, Num, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec<T> {
    pub eps0: T,
    pub eps1: T,
    pub coupling_strength: T,
    pub f_exponent: u32,
    pub g_exponent: u32,
}

impl<T: Num + Copy> Default for ModelSpec<T> {
    fn default() -> Self {
        Self {
            eps0: T::zero() - T::one(),
            eps1: T::one(),
            coupling_strength: T::one(),
            f_exponent: 4,
            g_exponent: 4,
        }
    }
}

/// Instantaneous eigensystem of `H(s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticFrame<T> {
    pub s: T,
    pub e_lower: T,
    pub e_upper: T,
    pub mixing_angle: T,
    pub eigvec_lower: [T; 2],
    pub eigvec_upper: [T; 2],
}

impl<T: Real> AdiabaticFrame<T> {
    #[inline]
    pub fn gap(&self) -> T {
        self.e_upper - self.e_lower
    }
}

fn check_s<T: ToPrimitive + PartialOrd + Num>(s: T) -> Result<()> {
    if s < T::zero() || s > T::one() {
        return Err(Error::Domain {
            what: "s",
            value: s.to_f64().unwrap_or(f64::NAN),
            domain: "[0, 1]",
        });
    }
    Ok(())
}

impl<T: Num + Copy + PartialOrd + ToPrimitive> ModelSpec<T> {
    pub fn new(eps0: T, eps1: T, coupling_strength: T, f_exponent: u32, g_exponent: u32) -> Result<Self> {
        let m = Self {
            eps0,
            eps1,
            coupling_strength,
            f_exponent,
            g_exponent,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps0 < self.eps1) {
            return Err(Error::InvalidModel(
                "diabatic levels must satisfy eps0 < eps1".into(),
            ));
        }
        if self.f_exponent == 0 || self.g_exponent == 0 {
            return Err(Error::InvalidModel(
                "schedule exponents must be positive".into(),
            ));
        }
        Ok(())
    }

    /// `f(s) = s^k`.
    pub fn f(&self, s: T) -> T {
        pow(s, self.f_exponent as usize)
    }

    /// `g(s) = -(1 - s)^m`.
    pub fn g(&self, s: T) -> T {
        T::zero() - pow(T::one() - s, self.g_exponent as usize)
    }

    /// Real symmetric `H(s)` in the computational basis, row-major.
    pub fn hamiltonian_at(&self, s: T) -> Result<[[T; 2]; 2]> {
        check_s(s)?;
        let f = self.f(s);
        let off = self.g(s) * self.coupling_strength;
        Ok([[f * self.eps0, off], [off, f * self.eps1]])
    }
}

impl<T: Real> ModelSpec<T> {
    fn df(&self, s: T) -> T {
        let k = self.f_exponent;
        T::from_u32(k).unwrap() * s.powi(k as i32 - 1)
    }

    fn dg(&self, s: T) -> T {
        let m = self.g_exponent;
        T::from_u32(m).unwrap() * (T::one() - s).powi(m as i32 - 1)
    }

    /// `dH/ds` in the computational basis.
    pub fn hamiltonian_derivative(&self, s: T) -> Result<[[T; 2]; 2]> {
        check_s(s)?;
        let df = self.df(s);
        let off = self.dg(s) * self.coupling_strength;
        Ok([[df * self.eps0, off], [off, df * self.eps1]])
    }

    // (X, Y) with 2 theta = atan2(Y, X).
    #[inline]
    fn angle_components(&self, s: T) -> (T, T) {
        let half = T::lit(0.5);
        (
            self.f(s) * (self.eps1 - self.eps0) * half,
            -self.g(s) * self.coupling_strength,
        )
    }

    pub fn mixing_angle(&self, s: T) -> Result<T> {
        check_s(s)?;
        let (x, y) = self.angle_components(s);
        Ok(y.atan2(x) * T::lit(0.5))
    }

    pub fn eigensystem(&self, s: T) -> Result<AdiabaticFrame<T>> {
        check_s(s)?;
        let (x, y) = self.angle_components(s);
        let mean = self.f(s) * (self.eps0 + self.eps1) * T::lit(0.5);
        let r = x.hypot(y);
        let theta = y.atan2(x) * T::lit(0.5);
        let (sin, cos) = theta.sin_cos();
        Ok(AdiabaticFrame {
            s,
            e_lower: mean - r,
            e_upper: mean + r,
            mixing_angle: theta,
            eigvec_lower: [cos, sin],
            eigvec_upper: [-sin, cos],
        })
    }

    /// Radial coupling `W(s) = <phi0| d/ds |phi1>`, which equals `-d theta/ds`
    /// in this frame.
    pub fn coupling_w(&self, s: T) -> Result<T> {
        check_s(s)?;
        let half = T::lit(0.5);
        let (x, y) = self.angle_components(s);
        let dx = self.df(s) * (self.eps1 - self.eps0) * half;
        let dy = -self.dg(s) * self.coupling_strength;
        let denom = x * x + y * y;
        if denom == T::zero() {
            return Ok(T::zero());
        }
        Ok(-(x * dy - y * dx) / denom * half)
    }

    /// `(E0, E1, W)` at `s` without domain checks or trigonometry; used in
    /// integrator inner loops.
    #[inline]
    pub(crate) fn local_terms(&self, s: T) -> (T, T, T) {
        let half = T::lit(0.5);
        let f = self.f(s);
        let x = f * (self.eps1 - self.eps0) * half;
        let y = -self.g(s) * self.coupling_strength;
        let mean = f * (self.eps0 + self.eps1) * half;
        let denom = x * x + y * y;
        let r = denom.sqrt();
        let w = if denom == T::zero() {
            T::zero()
        } else {
            let dx = self.df(s) * (self.eps1 - self.eps0) * half;
            let dy = -self.dg(s) * self.coupling_strength;
            -(x * dy - y * dx) / denom * half
        };
        (mean - r, mean + r, w)
    }

    /// `|∫_0^1 W(s) ds|` by adaptive quadrature.
    pub fn coupling_surface(&self) -> Result<T> {
        let w = |s: T| self.coupling_w(s).unwrap_or_else(|_| T::zero());
        let tol = T::epsilon() * T::lit(1000.0);
        let v = numeric::integrate(w, T::zero(), T::one(), tol, 2000)?;
        Ok(v.abs())
    }

    /// `|theta(1) - theta(0)|`, the closed form of [`Self::coupling_surface`].
    pub fn mixing_angle_span(&self) -> T {
        let a = self.mixing_angle(T::one()).unwrap();
        let b = self.mixing_angle(T::zero()).unwrap();
        (a - b).abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

    fn default64() -> ModelSpec<f64> {
        ModelSpec::default()
    }

    #[test]
    fn hamiltonian_endpoints_and_midpoint() {
        let m = default64();
        assert_eq!(m.hamiltonian_at(1.0).unwrap(), [[-1.0, 0.0], [0.0, 1.0]]);
        let h0 = m.hamiltonian_at(0.0).unwrap();
        assert_eq!(h0, [[0.0, -1.0], [-1.0, 0.0]]);
        assert_eq!(
            m.hamiltonian_at(0.5).unwrap(),
            [[-0.0625, -0.0625], [-0.0625, 0.0625]]
        );
    }

    #[test]
    fn hamiltonian_is_exact_over_rationals() {
        let m: ModelSpec<Ratio<i64>> = ModelSpec::default();
        let h = m.hamiltonian_at(Ratio::new(1, 2)).unwrap();
        let sixteenth = Ratio::new(1, 16);
        assert_eq!(h, [[-sixteenth, -sixteenth], [-sixteenth, sixteenth]]);
        let h = m.hamiltonian_at(Ratio::new(1, 3)).unwrap();
        assert_eq!(h[0][1], Ratio::new(-16, 81));
        assert_eq!(h[1][1], Ratio::new(1, 81));
        assert!(m.hamiltonian_at(Ratio::new(4, 3)).is_err());
    }

    #[test]
    fn out_of_range_s_is_domain_error() {
        let m = default64();
        assert!(matches!(m.hamiltonian_at(-0.1), Err(Error::Domain { .. })));
        assert!(matches!(m.eigensystem(1.5), Err(Error::Domain { .. })));
    }

    #[test]
    fn invalid_models_rejected() {
        assert!(ModelSpec::new(1.0, 1.0, 1.0, 4, 4).is_err());
        assert!(ModelSpec::new(-1.0, 1.0, 1.0, 0, 4).is_err());
        assert!(ModelSpec::new(-1.0, 1.0, 1.0, 2, 3).is_ok());
    }

    #[test]
    fn frame_endpoints() {
        let m = default64();
        let f1 = m.eigensystem(1.0).unwrap();
        assert_eq!((f1.e_lower, f1.e_upper), (-1.0, 1.0));
        assert_eq!(f1.eigvec_lower, [1.0, 0.0]);
        assert_eq!(f1.eigvec_upper, [-0.0, 1.0]);
        let f0 = m.eigensystem(0.0).unwrap();
        assert!((f0.e_lower + 1.0).abs() < 1e-15 && (f0.e_upper - 1.0).abs() < 1e-15);
        assert!((f0.eigvec_lower[0] - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((f0.eigvec_lower[1] - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((f0.eigvec_upper[0] + FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((f0.eigvec_upper[1] - FRAC_1_SQRT_2).abs() < 1e-15);
        let fm = m.eigensystem(0.5).unwrap();
        assert!((fm.e_lower + 0.088_388_347_648_318_44).abs() < 1e-15);
        assert!((fm.e_upper - 0.088_388_347_648_318_44).abs() < 1e-15);
    }

    #[test]
    fn eigenpairs_satisfy_eigen_equation() {
        let m = ModelSpec::new(-0.7, 1.3, 0.6, 3, 5).unwrap();
        for i in 0..=100 {
            let s = i as f64 / 100.0;
            let h = m.hamiltonian_at(s).unwrap();
            let fr = m.eigensystem(s).unwrap();
            for (v, e) in [(fr.eigvec_lower, fr.e_lower), (fr.eigvec_upper, fr.e_upper)] {
                let hv = [h[0][0] * v[0] + h[0][1] * v[1], h[1][0] * v[0] + h[1][1] * v[1]];
                assert!((hv[0] - e * v[0]).abs() < 1e-14);
                assert!((hv[1] - e * v[1]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn coupling_w_values() {
        let m = default64();
        assert_eq!(m.coupling_w(0.0).unwrap(), 0.0);
        assert_eq!(m.coupling_w(1.0).unwrap(), 0.0);
        assert!((m.coupling_w(0.5).unwrap().abs() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn coupling_w_matches_forward_difference_of_frames() {
        // <phi0(s) | phi1(s + h)> / h -> W(s)
        let h = 1e-6;
        for m in [default64(), ModelSpec::new(-0.5, 2.0, 0.3, 2, 6).unwrap()] {
            for i in 1..100 {
                let s = i as f64 / 100.0;
                let a = m.eigensystem(s).unwrap();
                let b = m.eigensystem(s + h).unwrap();
                let fd = (a.eigvec_lower[0] * b.eigvec_upper[0]
                    + a.eigvec_lower[1] * b.eigvec_upper[1])
                    / h;
                let w = m.coupling_w(s).unwrap();
                assert!((fd - w).abs() < 1e-6 * w.abs().max(1.0) * 10.0, "s={s} fd={fd} w={w}");
            }
        }
    }

    #[test]
    fn coupling_surface_default_is_quarter_pi() {
        let m = default64();
        assert!((m.coupling_surface().unwrap() - FRAC_PI_4).abs() < 1e-9);
        assert!((m.mixing_angle_span() - FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn coupling_surface_is_scale_free() {
        for c in [1e-3, 0.1, 7.0] {
            let m = ModelSpec::new(-1.0, 1.0, c, 4, 4).unwrap();
            let q = m.coupling_surface().unwrap();
            assert!((q - FRAC_PI_4).abs() < 1e-9, "c={c} q={q}");
            assert!((q - m.mixing_angle_span()).abs() < 1e-9);
        }
    }

    #[test]
    fn f32_frame() {
        let m: ModelSpec<f32> = ModelSpec::default();
        let fr = m.eigensystem(0.5).unwrap();
        assert!((fr.e_upper - 0.088_388_35).abs() < 1e-6);
        assert!((m.coupling_w(0.5).unwrap() - 4.0).abs() < 1e-4);
    }
}
