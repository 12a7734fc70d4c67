//! Levenberg–Marquardt for small dense least-squares problems with
//! central-difference Jacobians.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    /// Stop once an accepted step lowers the rss by less than this fraction.
    pub rel_tol: f64,
    /// Stop once the rss falls to or below this value.
    pub abs_floor: f64,
    /// Residual-vector evaluations allowed, Jacobian columns included.
    pub max_evals: usize,
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub x: Vec<f64>,
    pub rss: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Minimizes `sum r_i(x)^2`. `residuals` fills the residual vector and may
/// leave non-finite entries for invalid `x`, which are treated as infinite rss.
pub fn minimize<F>(mut residuals: F, n_residuals: usize, x0: &[f64], opts: &LmOptions) -> LmOutcome
where
    F: FnMut(&[f64], &mut [f64]),
{
    let k = x0.len();
    let mut x = x0.to_vec();
    let mut r = vec![0.0; n_residuals];
    let mut evals = 0usize;
    let mut eval = |x: &[f64], r: &mut [f64], evals: &mut usize| -> f64 {
        *evals += 1;
        residuals(x, r);
        let s: f64 = r.iter().map(|v| v * v).sum();
        if s.is_finite() {
            s
        } else {
            f64::INFINITY
        }
    };

    let mut rss = eval(&x, &mut r, &mut evals);
    if k == 0 || !rss.is_finite() {
        return LmOutcome {
            x,
            rss,
            evals,
            converged: k == 0,
        };
    }

    let mut lambda = 1e-3;
    let mut jac = DMatrix::<f64>::zeros(n_residuals, k);
    let mut r_plus = vec![0.0; n_residuals];
    let mut r_minus = vec![0.0; n_residuals];
    let mut trial = vec![0.0; n_residuals];

    loop {
        if rss <= opts.abs_floor {
            return LmOutcome { x, rss, evals, converged: true };
        }
        if evals + 2 * k + 1 > opts.max_evals {
            return LmOutcome { x, rss, evals, converged: false };
        }

        for j in 0..k {
            let h = 1e-7 * x[j].abs().max(1e-2);
            let mut xp = x.clone();
            xp[j] += h;
            let mut xm = x.clone();
            xm[j] -= h;
            eval(&xp, &mut r_plus, &mut evals);
            eval(&xm, &mut r_minus, &mut evals);
            for i in 0..n_residuals {
                jac[(i, j)] = (r_plus[i] - r_minus[i]) / (2.0 * h);
            }
        }
        if jac.iter().any(|v| !v.is_finite()) {
            return LmOutcome { x, rss, evals, converged: false };
        }

        let rv = DVector::from_column_slice(&r);
        let grad = jac.transpose() * &rv;
        let hess = jac.transpose() * &jac;
        let diag_floor = hess.diagonal().max() * 1e-12 + f64::MIN_POSITIVE;

        let mut improved = false;
        while !improved {
            if evals >= opts.max_evals {
                return LmOutcome { x, rss, evals, converged: false };
            }
            let mut a = hess.clone();
            for j in 0..k {
                a[(j, j)] += lambda * hess[(j, j)].max(diag_floor);
            }
            let step = match a.cholesky() {
                Some(ch) => ch.solve(&(-&grad)),
                None => {
                    lambda *= 4.0;
                    if lambda > 1e16 {
                        return LmOutcome { x, rss, evals, converged: true };
                    }
                    continue;
                }
            };
            let x_new: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let rss_new = eval(&x_new, &mut trial, &mut evals);
            if rss_new < rss {
                let rel = (rss - rss_new) / rss;
                let step_norm = step.norm();
                let x_norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                x = x_new;
                std::mem::swap(&mut r, &mut trial);
                rss = rss_new;
                lambda = (lambda / 3.0).max(1e-15);
                improved = true;
                if rel < opts.rel_tol || step_norm <= 1e-15 * (1.0 + x_norm) {
                    return LmOutcome { x, rss, evals, converged: true };
                }
            } else {
                lambda *= 4.0;
                if lambda > 1e16 {
                    // no descent direction left at working precision
                    return LmOutcome { x, rss, evals, converged: true };
                }
            }
        }
    }
}
