//! Univariate logistic likelihood-ratio tests per variable (raw SNPs for
//! SMA, aggregated-SNPs for SASA) with Benjamini-Hochberg FDR and
//! Bonferroni multiplicity control.
//!
//! Each test compares the null model (intercept + covariates) against the
//! same model plus one predictor; the statistic is the deviance difference
//! referred to chi-squared with 1 df. The null fit is shared across all
//! columns of a run.

use std::io::{BufRead, BufReader, Read, Write};

use nalgebra::{DMatrix, DVector};
use statrs::function::erf::erfc;

use crate::aggregate::AggregatedMatrix;
use crate::error::{Error, Result};
use crate::genotype::{CovariateMatrix, GenotypeMatrix, Phenotype, SnpMeta};
use crate::logistic::{irls_primal, IrlsOptions};
use crate::par;

/// Multiplicity-control procedure applied to a result set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultipleTesting {
    BenjaminiHochberg,
    Bonferroni,
}

impl MultipleTesting {
    pub fn as_str(&self) -> &'static str {
        match self {
            MultipleTesting::BenjaminiHochberg => "bh",
            MultipleTesting::Bonferroni => "bonferroni",
        }
    }
}

/// One tested variable: a SNP (SMA) or an aggregated cluster (SASA).
#[derive(Debug, Clone, PartialEq)]
pub struct AssocRecord {
    pub id: String,
    pub chrom: String,
    pub pos_first: u64,
    pub pos_last: u64,
    /// Source column span in the analyzed matrix; `None` for single SNPs.
    pub column_span: Option<(usize, usize)>,
    /// Deviance difference, >= 0.
    pub statistic: f64,
    /// Upper tail of chi-squared(1) at the statistic.
    pub p_value: f64,
    /// Fitted slope of the tested predictor.
    pub effect: f64,
    /// Set when the full-model fit hit the iteration cap (complete
    /// separation or near-separation); the p-value is computed at the cap.
    pub separated: bool,
    pub significant: bool,
}

/// A column excluded from testing, with the reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedVariable {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct AssociationResult {
    pub records: Vec<AssocRecord>,
    pub skipped: Vec<SkippedVariable>,
    /// Realized p-value cutoff (0 when nothing is rejected).
    pub threshold: f64,
    pub method: MultipleTesting,
    /// FDR level phi (BH) or significance level alpha (Bonferroni).
    pub level: f64,
}

impl AssociationResult {
    pub fn n_significant(&self) -> usize {
        self.records.iter().filter(|r| r.significant).count()
    }

    /// TSV: `id chrom pos_first pos_last statistic p significant`.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "id\tchrom\tpos_first\tpos_last\tstatistic\tp\tsignificant")?;
        for r in &self.records {
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.id,
                r.chrom,
                r.pos_first,
                r.pos_last,
                r.statistic,
                r.p_value,
                u8::from(r.significant)
            )?;
        }
        Ok(())
    }

    /// Summary counts for the run manifest.
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n_tested": self.records.len(),
            "n_skipped": self.skipped.len(),
            "n_significant": self.n_significant(),
            "threshold": self.threshold,
            "method": self.method.as_str(),
            "level": self.level,
            "skipped": self.skipped.iter().map(|s| {
                serde_json::json!({"id": s.id, "reason": s.reason})
            }).collect::<Vec<_>>(),
        })
    }

    /// Parse a results TSV written by [`AssociationResult::write_tsv`].
    /// Cluster column spans are recovered from `cluster_k:first-last` ids.
    pub fn read_tsv<R: Read>(
        reader: R,
        method: MultipleTesting,
        level: f64,
    ) -> Result<AssociationResult> {
        let mut lines = BufReader::new(reader).lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty results file".into()))??;
        if header != "id\tchrom\tpos_first\tpos_last\tstatistic\tp\tsignificant" {
            return Err(Error::Parse(format!(
                "unexpected results header: {:?}",
                header
            )));
        }
        let mut records = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 7 {
                return Err(Error::Parse(format!(
                    "results row {} has {} fields, expected 7",
                    lineno + 2,
                    f.len()
                )));
            }
            let parse_err = |what: &str| Error::Parse(format!(
                "bad {} at results row {}",
                what,
                lineno + 2
            ));
            records.push(AssocRecord {
                id: f[0].to_string(),
                chrom: f[1].to_string(),
                pos_first: f[2].parse().map_err(|_| parse_err("pos_first"))?,
                pos_last: f[3].parse().map_err(|_| parse_err("pos_last"))?,
                column_span: parse_cluster_span(f[0]),
                statistic: f[4].parse().map_err(|_| parse_err("statistic"))?,
                p_value: f[5].parse().map_err(|_| parse_err("p"))?,
                effect: 0.0,
                separated: false,
                significant: match f[6] {
                    "0" => false,
                    "1" => true,
                    _ => return Err(parse_err("significant flag")),
                },
            });
        }
        let threshold = records
            .iter()
            .filter(|r| r.significant)
            .map(|r| r.p_value)
            .fold(0.0f64, f64::max);
        Ok(AssociationResult {
            records,
            skipped: Vec::new(),
            threshold,
            method,
            level,
        })
    }
}

fn parse_cluster_span(id: &str) -> Option<(usize, usize)> {
    let (_, span) = id.strip_prefix("cluster_")?.split_once(':')?;
    let (a, b) = span.split_once('-')?;
    Some((a.parse().ok()?, b.parse().ok()?))
}

/// Outcome of one likelihood-ratio test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrtOutcome {
    pub statistic: f64,
    pub p_value: f64,
    pub effect: f64,
    pub separated: bool,
}

/// Upper-tail probability of chi-squared with 1 df.
fn chi2_1df_sf(stat: f64) -> f64 {
    erfc((stat / 2.0).sqrt()).clamp(0.0, 1.0)
}

const LRT_OPTS: IrlsOptions = IrlsOptions {
    max_iter: 50,
    grad_tol: 1e-8,
    max_halvings: 30,
};

/// Fitted logits beyond this give probabilities within 3e-7 of 0/1: the
/// signature of (near-)complete separation.
const SEPARATION_ETA: f64 = 15.0;

struct NullFit {
    log_likelihood: f64,
    design: DMatrix<f64>,
    y: DVector<f64>,
}

fn fit_null(y: &Phenotype, cov: &CovariateMatrix) -> Result<NullFit> {
    if y.len() != cov.n() {
        return Err(Error::DimensionMismatch(format!(
            "phenotype has {} rows, covariates {}",
            y.len(),
            cov.n()
        )));
    }
    if !y.both_classes_present() {
        return Err(Error::InvalidInput(
            "association tests require both classes present".into(),
        ));
    }
    let n = y.len();
    let design = DMatrix::from_fn(n, 1 + cov.c(), |i, j| {
        if j == 0 {
            1.0
        } else {
            cov.column(j - 1)[i]
        }
    });
    let yv = DVector::from_vec(y.as_f64());
    let penalties = DVector::zeros(design.ncols());
    let fit = irls_primal(&design, &yv, &penalties, LRT_OPTS, None);
    if !fit.converged {
        return Err(Error::NoConvergence {
            iterations: fit.iterations,
            grad_norm: fit.grad_max_norm,
        });
    }
    Ok(NullFit {
        log_likelihood: fit.log_likelihood,
        design,
        y: yv,
    })
}

fn lrt_against_null(x: &[f64], null: &NullFit) -> Result<LrtOutcome> {
    let n = null.y.len();
    if x.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "predictor has {} rows, phenotype {}",
            x.len(),
            n
        )));
    }
    if x.iter().all(|&v| v == x[0]) {
        return Err(Error::InvalidInput("constant predictor".into()));
    }
    let cu = null.design.ncols();
    let mut design = DMatrix::zeros(n, cu + 1);
    design.view_mut((0, 0), (n, cu)).copy_from(&null.design);
    for i in 0..n {
        design[(i, cu)] = x[i];
    }
    let penalties = DVector::zeros(cu + 1);
    let fit = irls_primal(&design, &null.y, &penalties, LRT_OPTS, None);
    let statistic = (2.0 * (fit.log_likelihood - null.log_likelihood)).max(0.0);
    let eta_max = (&design * &fit.coefs).amax();
    Ok(LrtOutcome {
        statistic,
        p_value: chi2_1df_sf(statistic),
        effect: fit.coefs[cu],
        separated: !fit.converged || eta_max > SEPARATION_ETA,
    })
}

/// LRT of the null model (intercept + covariates) against the same model
/// plus `x`; 1 df. Complete separation is reported with a flag, with the
/// statistic taken at the iteration cap.
pub fn lrt_single(x: &[f64], y: &Phenotype, cov: &CovariateMatrix) -> Result<LrtOutcome> {
    let null = fit_null(y, cov)?;
    lrt_against_null(x, &null)
}

/// Benjamini-Hochberg step-up: find the largest k with p_(k) <= k*phi/m and
/// reject every p at or below that threshold. Returns per-input flags and
/// the realized threshold (0 when nothing is rejected).
pub fn bh_fdr(pvalues: &[f64], phi: f64) -> Result<(Vec<bool>, f64)> {
    if pvalues.is_empty() {
        return Err(Error::Empty("no p-values to correct".into()));
    }
    if !(phi > 0.0 && phi < 1.0) {
        return Err(Error::InvalidInput(format!(
            "FDR level {} must be in (0, 1)",
            phi
        )));
    }
    validate_pvalues(pvalues)?;
    let m = pvalues.len();
    let mut sorted: Vec<f64> = pvalues.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut threshold = 0.0;
    for (k, &p) in sorted.iter().enumerate().rev() {
        if p <= (k + 1) as f64 * phi / m as f64 {
            threshold = p;
            break;
        }
    }
    let flags = pvalues
        .iter()
        .map(|&p| threshold > 0.0 && p <= threshold)
        .collect();
    Ok((flags, threshold))
}

/// Bonferroni: flag p <= alpha / m.
pub fn bonferroni(pvalues: &[f64], alpha: f64) -> Result<Vec<bool>> {
    if pvalues.is_empty() {
        return Err(Error::Empty("no p-values to correct".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!(
            "significance level {} must be in (0, 1)",
            alpha
        )));
    }
    validate_pvalues(pvalues)?;
    let cutoff = alpha / pvalues.len() as f64;
    Ok(pvalues.iter().map(|&p| p <= cutoff).collect())
}

fn validate_pvalues(pvalues: &[f64]) -> Result<()> {
    if let Some(&bad) = pvalues.iter().find(|&&p| !(0.0..=1.0).contains(&p)) {
        return Err(Error::InvalidInput(format!(
            "p-value {} outside [0, 1]",
            bad
        )));
    }
    Ok(())
}

/// Classical single-marker analysis: one LRT per SNP column, then BH.
/// Constant columns are skipped with a recorded reason.
pub fn run_sma(
    g: &GenotypeMatrix,
    y: &Phenotype,
    cov: &CovariateMatrix,
    phi: f64,
) -> Result<AssociationResult> {
    if g.n() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "genotypes have {} rows, phenotype {}",
            g.n(),
            y.len()
        )));
    }
    if !g.is_complete() {
        return Err(Error::InvalidInput(
            "association requires a complete matrix; impute first".into(),
        ));
    }
    let null = fit_null(y, cov)?;
    let outcomes = par::try_map_indices(g.p(), |j| {
        let x = g.column_f64(j)?;
        if x.iter().all(|&v| v == x[0]) {
            return Ok(None);
        }
        Ok(Some(lrt_against_null(&x, &null)?))
    })?;

    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for (j, outcome) in outcomes.into_iter().enumerate() {
        let meta = g.snp(j);
        match outcome {
            Some(o) => records.push(record_for_snp(meta, j, o)),
            None => skipped.push(SkippedVariable {
                id: meta.id.clone(),
                reason: "constant genotype column".into(),
            }),
        }
    }
    finalize(records, skipped, phi)
}

/// Single aggregated-SNP analysis: one LRT per non-degenerate aggregated
/// column, then BH. Cluster spans are carried into the records; `snps` is
/// the SNP metadata of the analyzed matrix the spans index into.
pub fn run_sasa(
    d: &AggregatedMatrix,
    snps: &[SnpMeta],
    y: &Phenotype,
    cov: &CovariateMatrix,
    phi: f64,
) -> Result<AssociationResult> {
    if d.n() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "aggregated matrix has {} rows, phenotype {}",
            d.n(),
            y.len()
        )));
    }
    if d.g() == 0 {
        return Err(Error::Empty("no aggregated columns to test".into()));
    }
    if d.cluster_spans().iter().any(|&(_, b)| b >= snps.len()) {
        return Err(Error::DimensionMismatch(
            "cluster spans exceed the SNP metadata".into(),
        ));
    }
    let null = fit_null(y, cov)?;
    let degenerate = d.degenerate();
    let outcomes = par::try_map_indices(d.g(), |k| {
        if degenerate[k] {
            return Ok(None);
        }
        let x = d.column(k);
        if x.iter().all(|&v| v == x[0]) {
            return Ok(None);
        }
        Ok(Some(lrt_against_null(x, &null)?))
    })?;

    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for (k, outcome) in outcomes.into_iter().enumerate() {
        let (first, last) = d.cluster_spans()[k];
        let id = format!("cluster_{}:{}-{}", k, first, last);
        match outcome {
            Some(o) => {
                let chrom = snps[first].chromosome.clone();
                debug_assert_eq!(chrom, snps[last].chromosome);
                records.push(AssocRecord {
                    id,
                    chrom,
                    pos_first: snps[first].position,
                    pos_last: snps[last].position,
                    column_span: Some((first, last)),
                    statistic: o.statistic,
                    p_value: o.p_value,
                    effect: o.effect,
                    separated: o.separated,
                    significant: false,
                });
            }
            None => skipped.push(SkippedVariable {
                id,
                reason: "degenerate aggregated column (constant)".into(),
            }),
        }
    }
    finalize(records, skipped, phi)
}

fn record_for_snp(meta: &SnpMeta, _j: usize, o: LrtOutcome) -> AssocRecord {
    AssocRecord {
        id: meta.id.clone(),
        chrom: meta.chromosome.clone(),
        pos_first: meta.position,
        pos_last: meta.position,
        column_span: None,
        statistic: o.statistic,
        p_value: o.p_value,
        effect: o.effect,
        separated: o.separated,
        significant: false,
    }
}

fn finalize(
    mut records: Vec<AssocRecord>,
    skipped: Vec<SkippedVariable>,
    phi: f64,
) -> Result<AssociationResult> {
    if records.is_empty() {
        return Err(Error::Empty(
            "no testable variables (all constant or degenerate)".into(),
        ));
    }
    let pvalues: Vec<f64> = records.iter().map(|r| r.p_value).collect();
    let (flags, threshold) = bh_fdr(&pvalues, phi)?;
    for (r, f) in records.iter_mut().zip(flags) {
        r.significant = f;
    }
    Ok(AssociationResult {
        records,
        skipped,
        threshold,
        method: MultipleTesting::BenjaminiHochberg,
        level: phi,
    })
}
