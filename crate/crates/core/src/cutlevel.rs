//! Supervised selection of the dendrogram cut level: ridge-penalized
//! logistic regression on aggregated predictors, scored by held-out AUC.
//!
//! The hierarchy is built on the training rows only; every candidate cluster
//! count aggregates train and test rows with that one hierarchy, fits ridge
//! on train (with an inner cross-validated penalty), and scores test AUC.
//! The winning level re-aggregates the full matrix.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::aggregate::{aggregate_raw, standardize, AggregatedMatrix};
use crate::error::{Error, Result};
use crate::genotype::{CovariateMatrix, GenotypeMatrix, Phenotype};
use crate::hac;
use crate::ld;
use crate::logistic::{irls_dual, irls_primal, sigmoid, IrlsOptions};
use crate::par;

/// Ridge-logistic fit: intercept and covariates unpenalized, aggregated
/// predictors penalized by `lambda`. The solution carries a convergence
/// certificate: penalized log-likelihood gradient max-norm <= 1e-6.
#[derive(Debug, Clone)]
pub struct RidgeFit {
    pub intercept: f64,
    pub covariate_coefs: Vec<f64>,
    /// One coefficient per aggregated column; degenerate columns get 0.
    pub coefs: Vec<f64>,
    pub lambda: f64,
    pub grad_max_norm: f64,
    /// Penalized log-likelihood after each accepted solver step.
    pub objective_trace: Vec<f64>,
}

/// Candidate cluster counts with their test AUCs and the winning level.
#[derive(Debug, Clone)]
pub struct CutLevelResult {
    /// (G, test AUC) in increasing G order.
    pub candidates: Vec<(usize, f64)>,
    /// AUC argmax; ties resolve to the smallest G.
    pub best_level: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
    /// Penalty chosen by inner cross-validation, per candidate level.
    pub lambda_per_level: Vec<f64>,
}

impl CutLevelResult {
    /// TSV of the AUC curve: `G<TAB>auc`, one header line.
    pub fn write_auc_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "G\tauc")?;
        for &(g, auc) in &self.candidates {
            writeln!(w, "{}\t{}", g, auc)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct CutLevelConfig {
    /// Candidate cluster counts; `None` uses ~20 geometrically spaced levels
    /// from max(#chromosomes, 50) up to P.
    pub grid: Option<Vec<usize>>,
    /// Train fraction of the stratified split.
    pub split_fraction: f64,
    pub seed: u64,
    /// LD band half-width for the hierarchy built on training rows.
    pub bandwidth: usize,
    /// Ridge penalty grid searched by inner cross-validation.
    pub lambda_grid: Vec<f64>,
    pub cv_folds: usize,
}

impl Default for CutLevelConfig {
    fn default() -> Self {
        CutLevelConfig {
            grid: None,
            split_fraction: 2.0 / 3.0,
            seed: 0,
            bandwidth: ld::DEFAULT_BANDWIDTH,
            lambda_grid: default_lambda_grid(),
            cv_folds: 5,
        }
    }
}

/// Seven-point geometric penalty grid from 1e-3 to 1e3.
pub fn default_lambda_grid() -> Vec<f64> {
    (-3..=3).map(|e| 10f64.powi(e)).collect()
}

/// ~20 geometrically spaced cluster counts from max(#chromosomes, 50) to P,
/// deduplicated.
pub fn default_grid(n_chromosomes: usize, p: usize) -> Vec<usize> {
    let lo = n_chromosomes.max(50).min(p).max(1);
    let points = 20usize;
    let mut grid: Vec<usize> = (0..points)
        .map(|i| {
            let t = i as f64 / (points - 1) as f64;
            ((lo as f64) * ((p as f64) / (lo as f64)).powf(t)).round() as usize
        })
        .collect();
    grid.sort_unstable();
    grid.dedup();
    grid
}

/// Stratified train/test split preserving the case/control ratio within one
/// individual per class; deterministic for a fixed seed.
pub fn split_train_test(
    y: &Phenotype,
    fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidInput(format!(
            "split fraction {} must be in (0, 1)",
            fraction
        )));
    }
    let mut cases: Vec<usize> = Vec::new();
    let mut controls: Vec<usize> = Vec::new();
    for (i, &v) in y.values().iter().enumerate() {
        if v == 1 {
            cases.push(i)
        } else {
            controls.push(i)
        }
    }
    if cases.len() < 2 || controls.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "stratified split needs at least 2 of each class (cases: {}, controls: {})",
            cases.len(),
            controls.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    cases.shuffle(&mut rng);
    controls.shuffle(&mut rng);
    let take = |class: &[usize]| -> usize {
        let t = (fraction * class.len() as f64).round() as usize;
        t.clamp(1, class.len() - 1)
    };
    let (tc, tk) = (take(&cases), take(&controls));
    let mut train: Vec<usize> = cases[..tc].iter().chain(&controls[..tk]).copied().collect();
    let mut test: Vec<usize> = cases[tc..].iter().chain(&controls[tk..]).copied().collect();
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Area under the ROC curve via the Mann-Whitney statistic with the tied-pair
/// convention: (concordant + tied/2) / (cases * controls).
pub fn auc_roc(y: &Phenotype, scores: &[f64]) -> Result<f64> {
    if scores.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} scores for {} phenotypes",
            scores.len(),
            y.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidInput("NaN score".into()));
    }
    let n1 = y.n_cases();
    let n0 = y.n_controls();
    if n1 == 0 || n0 == 0 {
        return Err(Error::InvalidInput(
            "AUC requires both classes present".into(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Midranks over tie groups; sum the case ranks.
    let mut rank_sum_cases = 0.0f64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let midrank = (i + j + 2) as f64 / 2.0; // ranks are 1-based
        for &idx in &order[i..=j] {
            if y.values()[idx] == 1 {
                rank_sum_cases += midrank;
            }
        }
        i = j + 1;
    }
    let u = rank_sum_cases - (n1 * (n1 + 1)) as f64 / 2.0;
    Ok(u / (n1 as f64 * n0 as f64))
}

/// Fit the ridge-logistic model. Degenerate aggregated columns are excluded
/// from the fit and reported with coefficient 0.
pub fn ridge_logistic_fit(
    d: &AggregatedMatrix,
    y: &Phenotype,
    cov: &CovariateMatrix,
    lambda: f64,
) -> Result<RidgeFit> {
    check_rows(d, y, cov)?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "lambda {} must be finite and >= 0",
            lambda
        )));
    }
    if !y.both_classes_present() {
        return Err(Error::InvalidInput(
            "ridge fit requires both classes present".into(),
        ));
    }
    let active = d.non_degenerate_columns();
    let fitted = fit_active(
        &dense_columns(d, &active),
        &covariate_matrix(cov),
        &DVector::from_vec(y.as_f64()),
        lambda,
        IrlsOptions::default(),
    )?;
    let mut coefs = vec![0.0; d.g()];
    for (idx, &col) in active.iter().enumerate() {
        coefs[col] = fitted.beta[idx];
    }
    Ok(RidgeFit {
        intercept: fitted.intercept,
        covariate_coefs: fitted.covariate_coefs,
        coefs,
        lambda,
        grad_max_norm: fitted.grad_max_norm,
        objective_trace: fitted.objective_trace,
    })
}

/// Inverse-logit of the linear predictor, clamped into (0, 1).
pub fn predict_prob(
    fit: &RidgeFit,
    d: &AggregatedMatrix,
    cov: &CovariateMatrix,
) -> Result<Vec<f64>> {
    if fit.coefs.len() != d.g() {
        return Err(Error::DimensionMismatch(format!(
            "fit has {} coefficients but the matrix has {} columns",
            fit.coefs.len(),
            d.g()
        )));
    }
    if fit.covariate_coefs.len() != cov.c() || d.n() != cov.n() {
        return Err(Error::DimensionMismatch(
            "covariates do not match the fit".into(),
        ));
    }
    let n = d.n();
    let mut eta = vec![fit.intercept; n];
    for (k, &gamma) in fit.covariate_coefs.iter().enumerate() {
        for (e, &v) in eta.iter_mut().zip(cov.column(k)) {
            *e += gamma * v;
        }
    }
    for (k, &beta) in fit.coefs.iter().enumerate() {
        if beta != 0.0 {
            for (e, &v) in eta.iter_mut().zip(d.column(k)) {
                *e += beta * v;
            }
        }
    }
    Ok(eta
        .into_iter()
        .map(|e| sigmoid(e).clamp(1e-12, 1.0 - 1e-12))
        .collect())
}

/// Split, build the hierarchy on training rows, sweep the grid of cluster
/// counts scoring held-out AUC, pick the argmax (smallest G on ties), and
/// aggregate the full matrix at that level.
pub fn select_cut_level(
    g_mat: &GenotypeMatrix,
    y: &Phenotype,
    cov: &CovariateMatrix,
    cfg: &CutLevelConfig,
) -> Result<(CutLevelResult, AggregatedMatrix)> {
    if y.len() != g_mat.n() || cov.n() != g_mat.n() {
        return Err(Error::DimensionMismatch(
            "genotypes, phenotype, and covariates must have equal row counts".into(),
        ));
    }
    if !g_mat.is_complete() {
        return Err(Error::InvalidInput(
            "cut-level selection requires a complete matrix; impute first".into(),
        ));
    }
    let p = g_mat.p();
    let n_chrom = g_mat.n_chromosomes();
    let grid = match &cfg.grid {
        Some(g) => {
            let mut g = g.clone();
            g.sort_unstable();
            g.dedup();
            if g.is_empty() {
                return Err(Error::InvalidInput("empty cut-level grid".into()));
            }
            if g[0] < n_chrom || *g.last().unwrap() > p {
                return Err(Error::InvalidInput(format!(
                    "grid levels must lie within [{}, {}]",
                    n_chrom, p
                )));
            }
            g
        }
        None => default_grid(n_chrom, p),
    };

    let (train, test) = split_train_test(y, cfg.split_fraction, cfg.seed)?;
    let x_train = g_mat.select_rows(&train)?;
    let x_test = g_mat.select_rows(&test)?;
    let y_train = y.select(&train)?;
    let y_test = y.select(&test)?;
    let cov_train = cov.select_rows(&train)?;
    let cov_test = cov.select_rows(&test)?;

    let bandwidth = cfg.bandwidth.min(p.saturating_sub(1)).max(1);
    let band = ld::ld_band(&x_train, bandwidth)?;
    let hierarchy = hac::build(&band, &g_mat.chromosome_barriers())?;

    let folds = cv_fold_assignment(&y_train, cfg.cv_folds, cfg.seed);

    let y_train_vec = DVector::from_vec(y_train.as_f64());
    let u_train = covariate_matrix(&cov_train);
    let u_test = covariate_matrix(&cov_test);

    let level_results = par::try_map_indices(grid.len(), |gi| {
        let level = grid[gi];
        let labels = hac::cut(&hierarchy, level)?;
        let d_train = standardize(&aggregate_raw(&x_train, &labels)?);
        let d_test = standardize(&aggregate_raw(&x_test, &labels)?);
        let active = d_train.non_degenerate_columns();
        if active.is_empty() {
            // Nothing to fit on: chance-level prediction.
            return Ok((0.5, cfg.lambda_grid.first().copied().unwrap_or(1.0)));
        }
        let dtr = dense_columns(&d_train, &active);
        let dte = dense_columns(&d_test, &active);

        // One kernel per level feeds every dual fit (CV slices and the
        // final refit); skip it when even the smallest fold fit stays
        // primal.
        let min_fit_rows = dtr.nrows() - dtr.nrows() / cfg.cv_folds.max(2);
        let kernel = if dtr.ncols() * 2 > min_fit_rows {
            Some(&dtr * dtr.transpose())
        } else {
            None
        };

        let lambda = select_lambda(
            &dtr,
            &u_train,
            &y_train_vec,
            &y_train,
            &folds,
            &cfg.lambda_grid,
            kernel.as_ref(),
        )?;
        let (fit, _) = fit_active_warm(
            &dtr,
            &u_train,
            &y_train_vec,
            lambda,
            IrlsOptions::default(),
            kernel.as_ref(),
            None,
        )?;
        let scores = linear_scores(&dte, &u_test, &fit);
        let auc = auc_roc(&y_test, &scores)?;
        Ok((auc, lambda))
    })?;

    let candidates: Vec<(usize, f64)> = grid
        .iter()
        .zip(&level_results)
        .map(|(&g, &(auc, _))| (g, auc))
        .collect();
    let lambda_per_level: Vec<f64> = level_results.iter().map(|&(_, l)| l).collect();

    let mut best_level = candidates[0].0;
    let mut best_auc = candidates[0].1;
    for &(g, auc) in &candidates[1..] {
        if auc > best_auc {
            best_auc = auc;
            best_level = g;
        }
    }

    let best_labels = hac::cut(&hierarchy, best_level)?;
    let d_best = standardize(&aggregate_raw(g_mat, &best_labels)?);
    Ok((
        CutLevelResult {
            candidates,
            best_level,
            train,
            test,
            seed: cfg.seed,
            lambda_per_level,
        },
        d_best,
    ))
}

// ---------------------------------------------------------------------------
// Internals shared by ridge fitting and the grid sweep.
// ---------------------------------------------------------------------------

struct ActiveFit {
    intercept: f64,
    covariate_coefs: Vec<f64>,
    beta: DVector<f64>,
    grad_max_norm: f64,
    objective_trace: Vec<f64>,
}

fn check_rows(d: &AggregatedMatrix, y: &Phenotype, cov: &CovariateMatrix) -> Result<()> {
    if d.n() != y.len() || d.n() != cov.n() {
        return Err(Error::DimensionMismatch(format!(
            "aggregated matrix has {} rows, phenotype {}, covariates {}",
            d.n(),
            y.len(),
            cov.n()
        )));
    }
    Ok(())
}

fn dense_columns(d: &AggregatedMatrix, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(d.n(), cols.len(), |i, k| d.column(cols[k])[i])
}

/// Intercept column followed by the centered covariates.
fn covariate_matrix(cov: &CovariateMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(cov.n(), 1 + cov.c(), |i, j| {
        if j == 0 {
            1.0
        } else {
            cov.column(j - 1)[i]
        }
    })
}

/// Solver state carried along a penalty path for warm starts.
enum WarmState {
    Primal(DVector<f64>),
    Dual(DVector<f64>, DVector<f64>),
}

/// Fit with the cheaper of the primal and dual routes; both satisfy the same
/// gradient certificate. `kernel` (= D D^T on the same rows) is used by the
/// dual route when supplied, sparing the caller repeated m x m products.
fn fit_active_warm(
    d: &DMatrix<f64>,
    u: &DMatrix<f64>,
    y: &DVector<f64>,
    lambda: f64,
    opts: IrlsOptions,
    kernel: Option<&DMatrix<f64>>,
    warm: Option<&WarmState>,
) -> Result<(ActiveFit, WarmState)> {
    let (m, g) = (d.nrows(), d.ncols());
    let cu = u.ncols();
    if lambda > 0.0 && g * 2 > m {
        let owned_kernel;
        let kernel = match kernel {
            Some(k) => k,
            None => {
                owned_kernel = d * d.transpose();
                &owned_kernel
            }
        };
        let init = match warm {
            Some(WarmState::Dual(uc, a)) => Some((uc, a)),
            _ => None,
        };
        let fit = irls_dual(u, d, kernel, y, lambda, opts, init);
        if !fit.converged {
            return Err(Error::NoConvergence {
                iterations: fit.iterations,
                grad_norm: fit.grad_max_norm,
            });
        }
        let state = WarmState::Dual(fit.u_coefs.clone(), fit.alpha.clone());
        Ok((
            ActiveFit {
                intercept: fit.u_coefs[0],
                covariate_coefs: fit.u_coefs.iter().skip(1).copied().collect(),
                beta: fit.beta,
                grad_max_norm: fit.grad_max_norm,
                objective_trace: fit.objective_trace,
            },
            state,
        ))
    } else {
        let mut design = DMatrix::zeros(m, cu + g);
        design.view_mut((0, 0), (m, cu)).copy_from(u);
        design.view_mut((0, cu), (m, g)).copy_from(d);
        let mut penalties = DVector::zeros(cu + g);
        for j in cu..cu + g {
            penalties[j] = lambda;
        }
        let init = match warm {
            Some(WarmState::Primal(t)) => Some(t),
            _ => None,
        };
        let fit = irls_primal(&design, y, &penalties, opts, init);
        if !fit.converged {
            return Err(Error::NoConvergence {
                iterations: fit.iterations,
                grad_norm: fit.grad_max_norm,
            });
        }
        let state = WarmState::Primal(fit.coefs.clone());
        Ok((
            ActiveFit {
                intercept: fit.coefs[0],
                covariate_coefs: (1..cu).map(|j| fit.coefs[j]).collect(),
                beta: DVector::from_fn(g, |j, _| fit.coefs[cu + j]),
                grad_max_norm: fit.grad_max_norm,
                objective_trace: fit.objective_trace,
            },
            state,
        ))
    }
}

fn fit_active(
    d: &DMatrix<f64>,
    u: &DMatrix<f64>,
    y: &DVector<f64>,
    lambda: f64,
    opts: IrlsOptions,
) -> Result<ActiveFit> {
    fit_active_warm(d, u, y, lambda, opts, None, None).map(|(fit, _)| fit)
}

fn linear_scores(d: &DMatrix<f64>, u: &DMatrix<f64>, fit: &ActiveFit) -> Vec<f64> {
    let n = d.nrows();
    let mut eta = vec![fit.intercept; n];
    for (k, &gamma) in fit.covariate_coefs.iter().enumerate() {
        for (i, e) in eta.iter_mut().enumerate() {
            *e += gamma * u[(i, k + 1)];
        }
    }
    for j in 0..d.ncols() {
        let b = fit.beta[j];
        if b != 0.0 {
            for (i, e) in eta.iter_mut().enumerate() {
                *e += b * d[(i, j)];
            }
        }
    }
    eta
}

/// Stratified fold ids over the training rows, deterministic in the seed.
fn cv_fold_assignment(y_train: &Phenotype, folds: usize, seed: u64) -> Vec<usize> {
    let folds = folds.max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x5EED_F01D));
    let mut assignment = vec![0usize; y_train.len()];
    for class in [1u8, 0u8] {
        let mut idx: Vec<usize> = y_train
            .values()
            .iter()
            .enumerate()
            .filter(|&(_, &v)| v == class)
            .map(|(i, _)| i)
            .collect();
        idx.shuffle(&mut rng);
        for (pos, &i) in idx.iter().enumerate() {
            assignment[i] = pos % folds;
        }
    }
    assignment
}

/// Inner cross-validation over the penalty grid, maximizing mean held-out
/// AUC. Folds are the outer loop so each fold walks the descending penalty
/// path with warm starts; `kernel` holds D D^T on the same rows as `d` when
/// the dual route applies. Ties keep the more shrunken candidate.
fn select_lambda(
    d: &DMatrix<f64>,
    u: &DMatrix<f64>,
    y: &DVector<f64>,
    y_pheno: &Phenotype,
    folds: &[usize],
    lambda_grid: &[f64],
    kernel: Option<&DMatrix<f64>>,
) -> Result<f64> {
    if lambda_grid.is_empty() {
        return Err(Error::InvalidInput("empty lambda grid".into()));
    }
    if lambda_grid.len() == 1 {
        return Ok(lambda_grid[0]);
    }
    let n_folds = folds.iter().max().map(|&m| m + 1).unwrap_or(0);
    let mut grid: Vec<f64> = lambda_grid.to_vec();
    grid.sort_by(|a, b| b.total_cmp(a));

    // aucs[lambda index] collects per-fold values.
    let mut aucs: Vec<Vec<f64>> = vec![Vec::new(); grid.len()];
    for fold in 0..n_folds {
        let fit_rows: Vec<usize> = (0..folds.len()).filter(|&i| folds[i] != fold).collect();
        let val_rows: Vec<usize> = (0..folds.len()).filter(|&i| folds[i] == fold).collect();
        if fit_rows.is_empty() || val_rows.is_empty() {
            continue;
        }
        let y_val = match y_pheno.select(&val_rows) {
            Ok(v) if v.both_classes_present() => v,
            _ => continue,
        };
        let d_fit = d.select_rows(&fit_rows);
        let u_fit = u.select_rows(&fit_rows);
        let y_fit = DVector::from_fn(fit_rows.len(), |i, _| y[fit_rows[i]]);
        let kernel_fit =
            kernel.map(|k| k.select_rows(&fit_rows).select_columns(&fit_rows));
        let d_val = d.select_rows(&val_rows);
        let u_val = u.select_rows(&val_rows);

        let mut warm: Option<WarmState> = None;
        for (li, &lambda) in grid.iter().enumerate() {
            let fitted = fit_active_warm(
                &d_fit,
                &u_fit,
                &y_fit,
                lambda,
                IrlsOptions::default(),
                kernel_fit.as_ref(),
                warm.as_ref(),
            );
            let fit = match fitted {
                Ok((f, state)) => {
                    warm = Some(state);
                    f
                }
                // A penalty that fails to converge is excluded from the grid.
                Err(Error::NoConvergence { .. }) => continue,
                Err(e) => return Err(e),
            };
            let scores = linear_scores(&d_val, &u_val, &fit);
            aucs[li].push(auc_roc(&y_val, &scores)?);
        }
    }

    let mut best = (f64::NEG_INFINITY, grid[0]);
    for (li, &lambda) in grid.iter().enumerate() {
        if aucs[li].is_empty() {
            continue;
        }
        let mean = aucs[li].iter().sum::<f64>() / aucs[li].len() as f64;
        if mean > best.0 {
            best = (mean, lambda);
        }
    }
    Ok(best.1)
}
