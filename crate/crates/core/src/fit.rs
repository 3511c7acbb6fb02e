//! Small dense Levenberg-Marquardt least-squares solver.
//!
//! Minimizes `sum_i r_i(p)^2` for a handful of parameters with a numerical
//! forward-difference Jacobian. This is all the curve fitting in the crate
//! needs (fringe fits have 3 parameters, avoided-crossing fits have 3), so a
//! compact damped normal-equations implementation is used instead of an
//! external solver.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Relative decrease of the cost below which the fit counts as converged.
    pub cost_tol: f64,
    /// Relative parameter step below which the fit counts as converged.
    pub step_tol: f64,
    /// Initial damping factor.
    pub lambda_init: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            max_iterations: 200,
            cost_tol: 1e-12,
            step_tol: 1e-12,
            lambda_init: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    /// Root-mean-square residual at the returned parameters.
    pub rms_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl LmOutcome {
    /// Turns a non-converged outcome into the crate's explicit fit failure,
    /// carrying the best-so-far parameters.
    pub fn into_result(self) -> Result<LmOutcome> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::FitNotConverged {
                iterations: self.iterations,
                rms_residual: self.rms_residual,
                params: self.params,
            })
        }
    }
}

/// Runs Levenberg-Marquardt on a residual function.
///
/// `residuals(p, out)` must fill `out` (length `n_residuals`) with the
/// residual vector at parameters `p`. Returns the best parameters found;
/// `converged` is false when the iteration budget ran out first.
pub fn levenberg_marquardt(
    residuals: impl Fn(&[f64], &mut [f64]),
    n_residuals: usize,
    init: &[f64],
    opts: &LmOptions,
) -> LmOutcome {
    let n_params = init.len();
    assert!(n_params > 0, "fit needs at least one parameter");
    assert!(
        n_residuals >= n_params,
        "fit needs at least as many residuals as parameters"
    );

    let mut params = init.to_vec();
    let mut r = vec![0.0; n_residuals];
    residuals(&params, &mut r);
    let mut cost = dot(&r, &r);

    let mut lambda = opts.lambda_init;
    let mut jac = vec![0.0; n_residuals * n_params];
    let mut r_step = vec![0.0; n_residuals];
    let mut converged = false;
    let mut iterations = 0;

    for iter in 0..opts.max_iterations {
        iterations = iter + 1;

        // Forward-difference Jacobian, column per parameter.
        for j in 0..n_params {
            let h = 1e-7 * params[j].abs().max(1e-9);
            let saved = params[j];
            params[j] = saved + h;
            residuals(&params, &mut r_step);
            params[j] = saved;
            for i in 0..n_residuals {
                jac[i * n_params + j] = (r_step[i] - r[i]) / h;
            }
        }

        // Normal equations: (JtJ + lambda * diag(JtJ)) dp = -Jt r
        let mut jtj = vec![0.0; n_params * n_params];
        let mut jtr = vec![0.0; n_params];
        for i in 0..n_residuals {
            let row = &jac[i * n_params..(i + 1) * n_params];
            for a in 0..n_params {
                jtr[a] += row[a] * r[i];
                for b in a..n_params {
                    jtj[a * n_params + b] += row[a] * row[b];
                }
            }
        }
        for a in 0..n_params {
            for b in 0..a {
                jtj[a * n_params + b] = jtj[b * n_params + a];
            }
        }

        // Try steps, raising the damping until the cost decreases.
        let mut improved = false;
        for _ in 0..16 {
            let mut lhs = jtj.clone();
            for a in 0..n_params {
                let d = jtj[a * n_params + a];
                lhs[a * n_params + a] = d + lambda * d.max(1e-30);
            }
            let rhs: Vec<f64> = jtr.iter().map(|v| -v).collect();
            let Some(dp) = solve_dense(&lhs, &rhs, n_params) else {
                lambda *= 10.0;
                continue;
            };

            let trial: Vec<f64> = params.iter().zip(&dp).map(|(p, d)| p + d).collect();
            residuals(&trial, &mut r_step);
            let trial_cost = dot(&r_step, &r_step);

            if trial_cost.is_finite() && trial_cost < cost {
                let step_small = dp
                    .iter()
                    .zip(&trial)
                    .all(|(d, p)| d.abs() <= opts.step_tol * (p.abs() + opts.step_tol));
                let cost_small = (cost - trial_cost) <= opts.cost_tol * cost;

                params = trial;
                std::mem::swap(&mut r, &mut r_step);
                cost = trial_cost;
                lambda = (lambda * 0.1).max(1e-12);
                improved = true;

                if step_small || cost_small {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }

        if converged {
            break;
        }
        if !improved {
            // Damping maxed out without progress: local minimum to working
            // precision.
            converged = true;
            break;
        }
    }

    LmOutcome {
        params,
        rms_residual: (cost / n_residuals as f64).sqrt(),
        iterations,
        converged,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gaussian elimination with partial pivoting for the (tiny) normal systems.
fn solve_dense(matrix: &[f64], rhs: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut a = matrix.to_vec();
    let mut b = rhs.to_vec();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i * n + col]
                .abs()
                .partial_cmp(&a[j * n + col].abs())
                .unwrap()
        })?;
        if a[pivot * n + col].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        for row in col + 1..n {
            let f = a[row * n + col] / a[col * n + col];
            for k in col..n {
                a[row * n + k] -= f * a[col * n + k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row * n + k] * x[k];
        }
        x[row] = acc / a[row * n + row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exponential_decay_parameters() {
        // y = a exp(-t/tau), a = 2.5, tau = 0.4
        let ts: Vec<f64> = (0..50).map(|i| i as f64 * 0.02).collect();
        let data: Vec<f64> = ts.iter().map(|t| 2.5 * (-t / 0.4).exp()).collect();
        let out = levenberg_marquardt(
            |p, r| {
                for (i, t) in ts.iter().enumerate() {
                    r[i] = p[0] * (-t / p[1]).exp() - data[i];
                }
            },
            ts.len(),
            &[1.0, 1.0],
            &LmOptions::default(),
        );
        assert!(out.converged);
        assert!((out.params[0] - 2.5).abs() < 1e-8, "a = {}", out.params[0]);
        assert!((out.params[1] - 0.4).abs() < 1e-8, "tau = {}", out.params[1]);
        assert!(out.rms_residual < 1e-10);
    }

    #[test]
    fn linear_problem_converges_in_few_iterations() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let out = levenberg_marquardt(
            |p, r| {
                for (i, x) in xs.iter().enumerate() {
                    r[i] = p[0] + p[1] * x - (3.0 + 0.5 * x);
                }
            },
            xs.len(),
            &[0.0, 0.0],
            &LmOptions::default(),
        );
        assert!(out.converged);
        assert!(out.iterations < 10);
        assert!((out.params[0] - 3.0).abs() < 1e-10);
        assert!((out.params[1] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn iteration_budget_reports_not_converged() {
        // Rosenbrock-style narrow valley with a 1-iteration budget.
        let opts = LmOptions {
            max_iterations: 1,
            ..Default::default()
        };
        let out = levenberg_marquardt(
            |p, r| {
                r[0] = 10.0 * (p[1] - p[0] * p[0]);
                r[1] = 1.0 - p[0];
            },
            2,
            &[-1.2, 1.0],
            &opts,
        );
        assert!(!out.converged);
        assert!(out.into_result().is_err());
    }
}
