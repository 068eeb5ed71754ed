//! Nelder-Mead downhill simplex minimization.

use crate::scalar::Real;

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions<T> {
    pub max_evals: usize,
    /// Stop when the spread of simplex values falls below this.
    pub f_tol: T,
    /// Stop when every vertex is within this distance (per coordinate) of the best.
    pub x_tol: T,
}

impl<T: Real> Default for SimplexOptions<T> {
    fn default() -> Self {
        Self {
            max_evals: 1000,
            f_tol: T::lit(1e-14),
            x_tol: T::lit(1e-10),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexResult<T> {
    pub x: Vec<T>,
    pub fx: T,
    pub evals: usize,
    pub converged: bool,
}

/// Minimizes `f` from `x0` with an axis-aligned initial simplex of edge `step`.
///
/// `f` may return `+inf` to mark infeasible points.
pub fn minimize<T: Real, F: FnMut(&[T]) -> T>(
    mut f: F,
    x0: &[T],
    step: &[T],
    opts: &SimplexOptions<T>,
) -> SimplexResult<T> {
    let n = x0.len();
    assert_eq!(step.len(), n);
    let (alpha, gamma, rho, sigma) = (T::one(), T::lit(2.0), T::lit(0.5), T::lit(0.5));
    let mut evals = 0;
    let mut eval = |x: &[T], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            T::infinity()
        } else {
            v
        }
    };

    let mut pts: Vec<(Vec<T>, T)> = Vec::with_capacity(n + 1);
    pts.push((x0.to_vec(), eval(x0, &mut evals)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] = x[i] + step[i];
        let fx = eval(&x, &mut evals);
        pts.push((x, fx));
    }

    let mut converged = false;
    while evals < opts.max_evals {
        pts.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let best = pts[0].1;
        let worst = pts[n].1;
        let spread_x = pts[1..].iter().fold(T::zero(), |m, (x, _)| {
            x.iter().zip(&pts[0].0).fold(m, |m, (a, b)| m.max((*a - *b).abs()))
        });
        if (worst - best).abs() <= opts.f_tol && spread_x <= opts.x_tol
            || spread_x <= opts.x_tol * T::lit(1e-3)
        {
            converged = true;
            break;
        }

        let mut centroid = vec![T::zero(); n];
        for (x, _) in &pts[..n] {
            for (c, &xi) in centroid.iter_mut().zip(x) {
                *c = *c + xi;
            }
        }
        let nn = T::from_usize(n).unwrap();
        centroid.iter_mut().for_each(|c| *c = *c / nn);
        let along = |coef: T, from: &[T]| -> Vec<T> {
            centroid
                .iter()
                .zip(from)
                .map(|(&c, &w)| c + coef * (c - w))
                .collect()
        };

        let xr = along(alpha, &pts[n].0);
        let fr = eval(&xr, &mut evals);
        if fr < pts[0].1 {
            let xe = along(gamma, &pts[n].0);
            let fe = eval(&xe, &mut evals);
            pts[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < pts[n - 1].1 {
            pts[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < pts[n].1 {
                let xc = along(rho, &pts[n].0);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = along(-rho, &pts[n].0);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            };
            if fc < pts[n].1.min(fr) {
                pts[n] = (xc, fc);
            } else {
                let x_best = pts[0].0.clone();
                for p in pts.iter_mut().skip(1) {
                    let xs: Vec<T> = x_best
                        .iter()
                        .zip(&p.0)
                        .map(|(&b, &x)| b + sigma * (x - b))
                        .collect();
                    let fs = eval(&xs, &mut evals);
                    *p = (xs, fs);
                }
            }
        }
    }
    pts.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    let (x, fx) = pts.swap_remove(0);
    SimplexResult {
        x,
        fx,
        evals,
        converged,
    }
}
