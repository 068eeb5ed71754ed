//! Small scalar routines: adaptive quadrature, 1-D minimization, grids.

use crate::error::{Error, Result};
use crate::scalar::Real;

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes (7-point rule).
const G_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let half = T::lit(0.5);
    let c = (a + b) * half;
    let h = (b - a) * half;
    let fc = f(c);
    let mut kronrod = fc * T::lit(GK_WEIGHTS[7]);
    let mut gauss = fc * T::lit(G_WEIGHTS[3]);
    for i in 0..7 {
        let x = h * T::lit(GK_NODES[i]);
        let pair = f(c - x) + f(c + x);
        kronrod = kronrod + pair * T::lit(GK_WEIGHTS[i]);
        if i % 2 == 1 {
            gauss = gauss + pair * T::lit(G_WEIGHTS[i / 2]);
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// Subdivides the interval with the largest error estimate until the
/// summed estimate falls below `tol` or `max_intervals` is reached.
pub fn integrate<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, tol: T, max_intervals: usize) -> Result<T> {
    let (v, e) = gk15(&f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    loop {
        let total_err = intervals.iter().fold(T::zero(), |s, iv| s + iv.3);
        if total_err <= tol {
            return Ok(intervals.iter().fold(T::zero(), |s, iv| s + iv.2));
        }
        if intervals.len() >= max_intervals {
            return Err(Error::Quadrature {
                achieved: total_err.to_f64_lossy(),
            });
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |(bi, be), (i, iv)| {
                if iv.3 > be {
                    (i, iv.3)
                } else {
                    (bi, be)
                }
            });
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = (lo + hi) * T::lit(0.5);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

/// Golden-section minimization of a unimodal `f` on `[a, b]`. Returns `(x, f(x))`.
pub fn golden_min<T: Real, F: Fn(T) -> T>(f: F, mut a: T, mut b: T, tol: T) -> (T, T) {
    let inv_phi = T::lit((5f64.sqrt() - 1.0) / 2.0);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = f(d);
        }
    }
    let x = (a + b) * T::lit(0.5);
    (x, f(x))
}

/// `n` evenly spaced points from `a` to `b` inclusive. `n == 1` yields `[a]`.
pub fn linspace<T: Real>(a: T, b: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let step = (b - a) / T::from_usize(n - 1).unwrap();
            (0..n)
                .map(|i| if i == n - 1 { b } else { a + step * T::from_usize(i).unwrap() })
                .collect()
        }
    }
}

/// `n` log-spaced points from `a` to `b` inclusive (both positive).
pub fn logspace<T: Real>(a: T, b: T, n: usize) -> Vec<T> {
    linspace(a.ln(), b.ln(), n).into_iter().map(T::exp).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomial_and_oscillatory() {
        let v = integrate(|x: f64| x * x * x, 0.0, 2.0, 1e-13, 100).unwrap();
        assert!((v - 4.0).abs() < 1e-13);
        let v = integrate(|x: f64| (40.0 * x).cos(), 0.0, 1.0, 1e-13, 1000).unwrap();
        assert!((v - 40f64.sin() / 40.0).abs() < 1e-13);
    }

    #[test]
    fn quadrature_budget_exhaustion_reports_tolerance() {
        let r = integrate(|x: f64| 1.0 / x.abs().sqrt().max(1e-300), -1.0, 1.0, 1e-15, 4);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }

    #[test]
    fn golden_finds_parabola_vertex() {
        let (x, fx) = golden_min(|x: f64| (x - 0.3) * (x - 0.3) + 1.0, 0.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-15);
    }

    #[test]
    fn grids() {
        let g = linspace(0.01, 0.5, 500);
        assert_eq!(g.len(), 500);
        assert_eq!(g[0], 0.01);
        assert_eq!(g[499], 0.5);
        let l = logspace(1e-4f64, 1e-2, 3);
        assert!((l[1] - 1e-3).abs() < 1e-15);
    }
}
