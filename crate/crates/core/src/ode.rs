//! Explicit Runge-Kutta integrators over real state vectors.
//!
//! Complex amplitude systems are packed as interleaved `(re, im)` pairs.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

impl OdeStats {
    pub fn merge(self, other: OdeStats) -> OdeStats {
        OdeStats {
            accepted: self.accepted + other.accepted,
            rejected: self.rejected + other.rejected,
            evaluations: self.evaluations + other.evaluations,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// Budget of attempted steps (accepted + rejected).
    pub max_steps: usize,
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// 5th-order minus embedded 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn rms_scaled<T: Real>(err: &[T], y0: &[T], y1: &[T], opts: &AdaptiveOptions<T>) -> T {
    let n = T::from_usize(err.len()).unwrap();
    let sum = err
        .iter()
        .zip(y0.iter().zip(y1))
        .fold(T::zero(), |acc, (&e, (&a, &b))| {
            let sc = opts.abs_tol + opts.rel_tol * a.abs().max(b.abs());
            let r = e / sc;
            acc + r * r
        });
    (sum / n).sqrt()
}

fn initial_step<T: Real, F>(rhs: &mut F, t0: T, y: &[T], f0: &[T], span: T, opts: &AdaptiveOptions<T>) -> T
where
    F: FnMut(T, &[T], &mut [T]),
{
    let zeros = vec![T::zero(); y.len()];
    let d0 = rms_scaled(y, y, &zeros, opts);
    let d1 = rms_scaled(f0, y, &zeros, opts);
    let h0 = if d0 < T::lit(1e-5) || d1 < T::lit(1e-5) {
        T::lit(1e-6)
    } else {
        T::lit(0.01) * d0 / d1
    };
    let h0 = h0.min(span);
    let y1: Vec<T> = y.iter().zip(f0).map(|(&a, &b)| a + h0 * b).collect();
    let mut f1 = vec![T::zero(); y.len()];
    rhs(t0 + h0, &y1, &mut f1);
    let df: Vec<T> = f1.iter().zip(f0).map(|(&a, &b)| a - b).collect();
    let d2 = rms_scaled(&df, y, &zeros, opts) / h0;
    let h1 = if d1.max(d2) <= T::lit(1e-15) {
        (h0 * T::lit(1e-3)).max(T::lit(1e-6))
    } else {
        (T::lit(0.01) / d1.max(d2)).powf(T::lit(0.2))
    };
    (h0 * T::lit(100.0)).min(h1).min(span)
}

/// Adaptive Dormand-Prince 5(4) integration of `y' = rhs(t, y)` from `t0`
/// to `t1 > t0`, advancing `y` in place with local extrapolation.
///
/// `observer(t, y)` is called at `t0` and after every accepted step.
pub fn dopri5<T, F, O>(
    mut rhs: F,
    t0: T,
    t1: T,
    y: &mut [T],
    opts: &AdaptiveOptions<T>,
    mut observer: O,
) -> Result<OdeStats>
where
    T: Real,
    F: FnMut(T, &[T], &mut [T]),
    O: FnMut(T, &[T]),
{
    assert!(t1 >= t0, "dopri5 integrates forward only");
    let n = y.len();
    let mut stats = OdeStats::default();
    observer(t0, y);
    if t1 == t0 {
        return Ok(stats);
    }
    let mut k = vec![vec![T::zero(); n]; 7];
    let mut ytmp = vec![T::zero(); n];
    let mut ynew = vec![T::zero(); n];
    let mut err = vec![T::zero(); n];

    let mut t = t0;
    rhs(t, y, &mut k[0]);
    stats.evaluations += 1;
    let mut h = initial_step(&mut rhs, t0, y, &k[0], t1 - t0, opts);
    stats.evaluations += 1;
    let mut last_rejected = false;

    let lit = T::lit;
    while t < t1 {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::StepLimit {
                steps: opts.max_steps,
                z: t.to_f64_lossy(),
                norm_drift: f64::NAN,
            });
        }
        if h <= T::epsilon() * lit(16.0) * t.abs().max(T::one()) {
            return Err(Error::StepUnderflow { z: t.to_f64_lossy() });
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }

        macro_rules! stage {
            ($dst:expr, $c:expr, [$(($j:expr, $a:expr)),*]) => {{
                for i in 0..n {
                    ytmp[i] = y[i] $(+ h * lit($a) * k[$j][i])*;
                }
                rhs(t + h * lit($c), &ytmp, &mut k[$dst]);
            }};
        }
        stage!(1, C2, [(0, A21)]);
        stage!(2, C3, [(0, A31), (1, A32)]);
        stage!(3, C4, [(0, A41), (1, A42), (2, A43)]);
        stage!(4, C5, [(0, A51), (1, A52), (2, A53), (3, A54)]);
        stage!(5, 1.0, [(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)]);
        for i in 0..n {
            ynew[i] = y[i]
                + h * (lit(A71) * k[0][i]
                    + lit(A73) * k[2][i]
                    + lit(A74) * k[3][i]
                    + lit(A75) * k[4][i]
                    + lit(A76) * k[5][i]);
        }
        rhs(t + h, &ynew, &mut k[6]);
        stats.evaluations += 6;
        for i in 0..n {
            err[i] = h
                * (lit(E1) * k[0][i]
                    + lit(E3) * k[2][i]
                    + lit(E4) * k[3][i]
                    + lit(E5) * k[4][i]
                    + lit(E6) * k[5][i]
                    + lit(E7) * k[6][i]);
        }
        let e = rms_scaled(&err, y, &ynew, opts);
        if e <= T::one() {
            t = if last { t1 } else { t + h };
            y.copy_from_slice(&ynew);
            k.swap(0, 6);
            stats.accepted += 1;
            observer(t, y);
            let mut fac = lit(0.9) * e.max(lit(1e-10)).powf(lit(-0.2));
            fac = fac.min(lit(5.0)).max(lit(0.2));
            if last_rejected {
                fac = fac.min(T::one());
            }
            h = h * fac;
            last_rejected = false;
        } else {
            stats.rejected += 1;
            let fac = (lit(0.9) * e.powf(lit(-0.2))).max(lit(0.2));
            h = h * fac;
            last_rejected = true;
        }
    }
    Ok(stats)
}

/// Classical fixed-step 4th-order Runge-Kutta with `steps` equal steps.
pub fn rk4<T, F, O>(mut rhs: F, t0: T, t1: T, y: &mut [T], steps: usize, mut observer: O) -> OdeStats
where
    T: Real,
    F: FnMut(T, &[T], &mut [T]),
    O: FnMut(T, &[T]),
{
    let n = y.len();
    let mut k1 = vec![T::zero(); n];
    let mut k2 = vec![T::zero(); n];
    let mut k3 = vec![T::zero(); n];
    let mut k4 = vec![T::zero(); n];
    let mut tmp = vec![T::zero(); n];
    let steps = steps.max(1);
    let h = (t1 - t0) / T::from_usize(steps).unwrap();
    let half = T::lit(0.5);
    let sixth = T::one() / T::lit(6.0);
    observer(t0, y);
    for step in 0..steps {
        let t = t0 + h * T::from_usize(step).unwrap();
        rhs(t, y, &mut k1);
        for i in 0..n {
            tmp[i] = y[i] + half * h * k1[i];
        }
        rhs(t + half * h, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + half * h * k2[i];
        }
        rhs(t + half * h, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + h * k3[i];
        }
        let t_next = if step + 1 == steps { t1 } else { t + h };
        rhs(t_next, &tmp, &mut k4);
        for i in 0..n {
            y[i] = y[i] + h * sixth * (k1[i] + (k2[i] + k3[i]) * T::lit(2.0) + k4[i]);
        }
        observer(t_next, y);
    }
    OdeStats {
        accepted: steps,
        rejected: 0,
        evaluations: 4 * steps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillator(_t: f64, y: &[f64], dy: &mut [f64]) {
        dy[0] = y[1];
        dy[1] = -y[0];
    }

    #[test]
    fn dopri5_harmonic_oscillator() {
        let mut y = [1.0, 0.0];
        let opts = AdaptiveOptions {
            rel_tol: 1e-11,
            abs_tol: 1e-13,
            max_steps: 100_000,
        };
        let mut last_t = 0.0;
        let stats = dopri5(oscillator, 0.0, 10.0, &mut y, &opts, |t, _| last_t = t).unwrap();
        assert_eq!(last_t, 10.0);
        assert!((y[0] - 10f64.cos()).abs() < 1e-9);
        assert!((y[1] + 10f64.sin()).abs() < 1e-9);
        assert!(stats.accepted > 10);
    }

    #[test]
    fn dopri5_step_budget() {
        let mut y = [1.0, 0.0];
        let opts = AdaptiveOptions {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            max_steps: 5,
        };
        let r = dopri5(oscillator, 0.0, 100.0, &mut y, &opts, |_, _| {});
        assert!(matches!(r, Err(Error::StepLimit { steps: 5, .. })));
    }

    #[test]
    fn rk4_is_fourth_order() {
        let err = |n| {
            let mut y = [1.0, 0.0];
            rk4(oscillator, 0.0, 5.0, &mut y, n, |_, _| {});
            (y[0] - 5f64.cos()).abs()
        };
        let order = (err(50) / err(100)).log2();
        assert!(order > 3.8 && order < 4.2, "order {order}");
    }

    #[test]
    fn zero_length_interval_is_noop() {
        let mut y = [0.3, 0.4];
        let opts = AdaptiveOptions {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_steps: 10,
        };
        let s = dopri5(oscillator, 1.0, 1.0, &mut y, &opts, |_, _| {}).unwrap();
        assert_eq!(s.accepted, 0);
        assert_eq!(y, [0.3, 0.4]);
    }
}
