//! Internal IRLS engine for (optionally ridge-penalized) logistic
//! regression, shared by the cut-level selection and the association tests.
//!
//! Two routes solve the same optimization problem:
//!
//! * `irls_primal` — Newton steps on the coefficient vector, one Cholesky of
//!   the penalized normal matrix per iteration. Right choice when the number
//!   of columns is at most about the number of rows.
//! * `irls_dual` — the representer parametrization `beta = D^T alpha` for a
//!   penalized block with many more columns than rows. Each iteration
//!   factors the n x n matrix `K + lambda W^-1` (K = D D^T) instead of the
//!   G x G normal matrix and reproduces the primal Newton iterate exactly.
//!
//! Both use step halving, so the penalized log-likelihood trace is
//! non-decreasing, and both report the primal gradient max-norm as the
//! convergence certificate.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy)]
pub(crate) struct IrlsOptions {
    pub max_iter: usize,
    pub grad_tol: f64,
    pub max_halvings: usize,
}

impl Default for IrlsOptions {
    fn default() -> Self {
        IrlsOptions {
            max_iter: 100,
            grad_tol: 1e-6,
            max_halvings: 30,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct IrlsFit {
    /// Coefficients for the full design, in column order.
    pub coefs: DVector<f64>,
    pub grad_max_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Penalized log-likelihood after each accepted step (index 0 = start).
    pub objective_trace: Vec<f64>,
    /// Unpenalized log-likelihood at the final coefficients.
    pub log_likelihood: f64,
}

const MIN_WEIGHT: f64 = 1e-10;

pub(crate) fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// log(1 + exp(eta)) without overflow.
fn softplus(eta: f64) -> f64 {
    eta.max(0.0) + (-eta.abs()).exp().ln_1p()
}

fn log_likelihood(eta: &DVector<f64>, y: &DVector<f64>) -> f64 {
    eta.iter()
        .zip(y.iter())
        .map(|(&e, &yi)| yi * e - softplus(e))
        .sum()
}

/// Cholesky solve with escalating diagonal jitter as a fallback.
fn solve_spd(mut h: DMatrix<f64>, rhs: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let k = h.nrows();
    let scale = (0..k).map(|i| h[(i, i)].abs()).fold(0.0f64, f64::max).max(1.0);
    let mut jitter = 0.0;
    for attempt in 0..6 {
        if attempt > 0 {
            let add = scale * 1e-12 * 100f64.powi(attempt - 1) - jitter;
            for i in 0..k {
                h[(i, i)] += add;
            }
            jitter += add;
        }
        if let Some(chol) = h.clone().cholesky() {
            return Some(chol.solve(rhs));
        }
    }
    h.lu().solve(rhs)
}

/// Newton/IRLS on the full coefficient vector. `penalties[j]` is the ridge
/// weight on column j (0 leaves it unpenalized).
pub(crate) fn irls_primal(
    design: &DMatrix<f64>,
    y: &DVector<f64>,
    penalties: &DVector<f64>,
    opts: IrlsOptions,
    init: Option<&DVector<f64>>,
) -> IrlsFit {
    let (n, k) = (design.nrows(), design.ncols());
    debug_assert_eq!(y.len(), n);
    debug_assert_eq!(penalties.len(), k);

    let mut theta = match init {
        Some(t) if t.len() == k => t.clone(),
        _ => DVector::zeros(k),
    };
    let mut eta = design * &theta;
    let penalty_of = |t: &DVector<f64>| -> f64 {
        0.5 * t
            .iter()
            .zip(penalties.iter())
            .map(|(&v, &p)| p * v * v)
            .sum::<f64>()
    };
    let mut objective = log_likelihood(&eta, y) - penalty_of(&theta);
    let mut trace = vec![objective];
    let mut grad_max = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    for iter in 0..opts.max_iter {
        iterations = iter;
        let mu = eta.map(sigmoid);
        let resid = y - &mu;
        let mut grad = design.transpose() * &resid;
        for j in 0..k {
            grad[j] -= penalties[j] * theta[j];
        }
        grad_max = grad.amax();
        if grad_max <= opts.grad_tol {
            converged = true;
            break;
        }

        let w = mu.map(|m| (m * (1.0 - m)).max(MIN_WEIGHT));
        let mut weighted = design.clone();
        for i in 0..n {
            let wi = w[i];
            for j in 0..k {
                weighted[(i, j)] *= wi;
            }
        }
        let mut h = design.transpose() * weighted;
        for j in 0..k {
            h[(j, j)] += penalties[j];
        }
        let grad_mat = DMatrix::from_column_slice(k, 1, grad.as_slice());
        let delta = match solve_spd(h, &grad_mat) {
            Some(d) => DVector::from_column_slice(d.as_slice()),
            None => break,
        };

        // The acceptance slack must scale with |objective|: near the
        // optimum the true improvement drops below the summation noise of
        // the log-likelihood, and an absolute threshold would reject the
        // final Newton steps and freeze the iterate short of tolerance.
        let slack = 1e-12 * (1.0 + objective.abs());
        let mut accepted = false;
        let mut t = 1.0;
        for _ in 0..=opts.max_halvings {
            let theta_trial = &theta + &delta * t;
            let eta_trial = design * &theta_trial;
            let obj_trial = log_likelihood(&eta_trial, y) - penalty_of(&theta_trial);
            if obj_trial >= objective - slack {
                theta = theta_trial;
                eta = eta_trial;
                objective = obj_trial;
                trace.push(objective);
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    if !converged {
        // Refresh the certificate at the final iterate.
        let mu = eta.map(sigmoid);
        let resid = y - &mu;
        let mut grad = design.transpose() * &resid;
        for j in 0..k {
            grad[j] -= penalties[j] * theta[j];
        }
        grad_max = grad.amax();
        converged = grad_max <= opts.grad_tol;
    }

    IrlsFit {
        log_likelihood: log_likelihood(&eta, y),
        coefs: theta,
        grad_max_norm: grad_max,
        iterations,
        converged,
        objective_trace: trace,
    }
}

#[derive(Debug, Clone)]
pub(crate) struct DualFit {
    /// Coefficients of the unpenalized block (intercept, covariates).
    pub u_coefs: DVector<f64>,
    /// Representer weights; `beta = D^T alpha`.
    pub alpha: DVector<f64>,
    /// Materialized penalized coefficients, `beta = D^T alpha`.
    pub beta: DVector<f64>,
    pub grad_max_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub objective_trace: Vec<f64>,
}

/// Representer-form IRLS for `y ~ U u + D beta - (lambda/2)||beta||^2` with
/// `beta = D^T alpha`. `kernel` must equal `D D^T`; `lambda` must be > 0.
pub(crate) fn irls_dual(
    u: &DMatrix<f64>,
    d: &DMatrix<f64>,
    kernel: &DMatrix<f64>,
    y: &DVector<f64>,
    lambda: f64,
    opts: IrlsOptions,
    init: Option<(&DVector<f64>, &DVector<f64>)>,
) -> DualFit {
    let (n, cu) = (u.nrows(), u.ncols());
    debug_assert!(lambda > 0.0);
    debug_assert_eq!(kernel.nrows(), n);

    let (mut u_coefs, mut alpha): (DVector<f64>, DVector<f64>) = match init {
        Some((uc, a)) if uc.len() == cu && a.len() == n => (uc.clone(), a.clone()),
        _ => (DVector::zeros(cu), DVector::zeros(n)),
    };
    let mut k_alpha = kernel * &alpha;
    let mut eta = u * &u_coefs + &k_alpha;
    let mut objective = log_likelihood(&eta, y) - 0.5 * lambda * alpha.dot(&k_alpha);
    let mut trace = vec![objective];
    let mut grad_max = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    let primal_grad_max = |eta: &DVector<f64>, alpha: &DVector<f64>| -> f64 {
        let mu = eta.map(sigmoid);
        let resid = y - &mu;
        let g_u = u.transpose() * &resid;
        // g_beta = D^T (y - mu) - lambda D^T alpha
        let g_beta = d.transpose() * (&resid - alpha * lambda);
        g_u.amax().max(g_beta.amax())
    };

    for iter in 0..opts.max_iter {
        iterations = iter;
        grad_max = primal_grad_max(&eta, &alpha);
        if grad_max <= opts.grad_tol {
            converged = true;
            break;
        }

        let mu = eta.map(sigmoid);
        let w = mu.map(|m| (m * (1.0 - m)).max(MIN_WEIGHT));
        let z = &eta + DVector::from_fn(n, |i, _| (y[i] - mu[i]) / w[i]);

        // A = K + lambda * diag(1/w); solve against [U | z].
        let mut a = kernel.clone();
        for i in 0..n {
            a[(i, i)] += lambda / w[i];
        }
        let mut rhs = DMatrix::zeros(n, cu + 1);
        rhs.view_mut((0, 0), (n, cu)).copy_from(u);
        rhs.set_column(cu, &z);
        let solved = match solve_spd(a, &rhs) {
            Some(s) => s,
            None => break,
        };
        let alpha_u = solved.columns(0, cu).into_owned();
        let alpha_z: DVector<f64> = solved.column(cu).into_owned();

        // Schur system for the unpenalized block.
        let k_alpha_u = kernel * &alpha_u;
        let k_alpha_z = kernel * &alpha_z;
        let mut uw = u.clone();
        for i in 0..n {
            let wi = w[i];
            for j in 0..cu {
                uw[(i, j)] *= wi;
            }
        }
        let s = uw.transpose() * (u - &k_alpha_u);
        let srhs = uw.transpose() * (&z - &k_alpha_z);
        let u_new = match s.lu().solve(&srhs) {
            Some(sol) => DVector::from_column_slice(sol.as_slice()),
            None => break,
        };
        let alpha_new = &alpha_z - &alpha_u * &u_new;

        let du = &u_new - &u_coefs;
        let dalpha = &alpha_new - &alpha;
        let k_dalpha = kernel * &dalpha;

        let slack = 1e-12 * (1.0 + objective.abs());
        let mut accepted = false;
        let mut t = 1.0;
        for _ in 0..=opts.max_halvings {
            let alpha_trial = &alpha + &dalpha * t;
            let k_alpha_trial = &k_alpha + &k_dalpha * t;
            let u_trial = &u_coefs + &du * t;
            let eta_trial = u * &u_trial + &k_alpha_trial;
            let penalty = 0.5 * lambda * alpha_trial.dot(&k_alpha_trial);
            let obj_trial = log_likelihood(&eta_trial, y) - penalty;
            if obj_trial >= objective - slack {
                alpha = alpha_trial;
                k_alpha = k_alpha_trial;
                u_coefs = u_trial;
                eta = eta_trial;
                objective = obj_trial;
                trace.push(objective);
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    if !converged {
        grad_max = primal_grad_max(&eta, &alpha);
        converged = grad_max <= opts.grad_tol;
    }

    DualFit {
        beta: d.transpose() * &alpha,
        alpha,
        u_coefs,
        grad_max_norm: grad_max,
        iterations,
        converged,
        objective_trace: trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn toy_problem() -> (DMatrix<f64>, DVector<f64>) {
        // 12 rows, intercept + 2 predictors with a real signal.
        let x1 = [0.0, 1.0, 2.0, 0.0, 1.0, 2.0, 0.0, 1.0, 2.0, 0.0, 1.0, 2.0];
        let x2 = [1.0, 0.0, 1.0, 2.0, 2.0, 0.0, 1.0, 1.0, 2.0, 0.0, 2.0, 1.0];
        let y = [0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0];
        let n = y.len();
        let design = DMatrix::from_fn(n, 3, |i, j| match j {
            0 => 1.0,
            1 => x1[i],
            _ => x2[i],
        });
        (design, DVector::from_row_slice(&y))
    }

    #[test]
    fn primal_converges_with_certificate() {
        let (design, y) = toy_problem();
        let pen = DVector::from_vec(vec![0.0, 1.0, 1.0]);
        let fit = irls_primal(&design, &y, &pen, IrlsOptions::default(), None);
        assert!(fit.converged);
        assert!(fit.grad_max_norm <= 1e-6);
    }

    #[test]
    fn objective_trace_is_nondecreasing() {
        let (design, y) = toy_problem();
        let pen = DVector::from_vec(vec![0.0, 0.5, 0.5]);
        let fit = irls_primal(&design, &y, &pen, IrlsOptions::default(), None);
        for w in fit.objective_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "{} then {}", w[0], w[1]);
        }
    }

    #[test]
    fn dual_route_matches_primal() {
        let (design, y) = toy_problem();
        let lambda = 0.7;
        let pen = DVector::from_vec(vec![0.0, lambda, lambda]);
        let primal = irls_primal(&design, &y, &pen, IrlsOptions::default(), None);

        let u = DMatrix::from_fn(design.nrows(), 1, |_, _| 1.0);
        let d = design.columns(1, 2).into_owned();
        let kernel = &d * d.transpose();
        let dual = irls_dual(&u, &d, &kernel, &y, lambda, IrlsOptions::default(), None);
        assert!(dual.converged);
        assert_abs_diff_eq!(dual.u_coefs[0], primal.coefs[0], epsilon = 1e-6);
        assert_abs_diff_eq!(dual.beta[0], primal.coefs[1], epsilon = 1e-6);
        assert_abs_diff_eq!(dual.beta[1], primal.coefs[2], epsilon = 1e-6);
    }

    #[test]
    fn huge_penalty_shrinks_coefficients() {
        let (design, y) = toy_problem();
        let pen = DVector::from_vec(vec![0.0, 1e8, 1e8]);
        let fit = irls_primal(&design, &y, &pen, IrlsOptions::default(), None);
        assert!(fit.converged);
        assert!(fit.coefs[1].abs() <= 1e-3);
        assert!(fit.coefs[2].abs() <= 1e-3);
    }
}
