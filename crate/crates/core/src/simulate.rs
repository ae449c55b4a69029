//! Block-structured genotype simulation with a logit case-control phenotype:
//! latent-haplotype LD blocks, singleSNP/clusSNP causal scenarios,
//! effect-size calibration against a fitted-probability MSE target, and
//! chip masking with a nearest-mapped-SNP record for unmapped causal SNPs.
//!
//! Everything is deterministic in the configured seed; sub-streams are
//! derived per block / phenotype replicate so block simulation can run in
//! parallel without changing the output.

use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use nalgebra::{DMatrix, DVector};

use crate::aggregate::aggregate_raw;
use crate::error::{Error, Result};
use crate::genotype::{GenotypeMatrix, Phenotype, SnpMeta};
use crate::hac;
use crate::ld;
use crate::logistic::{irls_primal, sigmoid, IrlsOptions};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    #[serde(rename = "singleSNP")]
    SingleSnp,
    #[serde(rename = "clusSNP")]
    ClusSnp,
}

impl Scenario {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::SingleSnp => "singleSNP",
            Scenario::ClusSnp => "clusSNP",
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "singleSNP" | "single-snp" | "single" => Ok(Scenario::SingleSnp),
            "clusSNP" | "clus-snp" | "cluster" => Ok(Scenario::ClusSnp),
            _ => Err(Error::InvalidInput(format!("unknown scenario {:?}", s))),
        }
    }
}

fn default_block_size_mean() -> usize {
    20
}
fn default_block_size_jitter() -> usize {
    5
}
fn default_within_block_r2() -> f64 {
    0.8
}
fn default_maf_range() -> (f64, f64) {
    (0.1, 0.4)
}
fn default_ell() -> usize {
    1
}
fn default_prevalence() -> f64 {
    0.3
}
fn default_chip_fraction() -> f64 {
    0.4
}
fn default_target_mse() -> f64 {
    0.05
}
fn default_phenotype_replicates() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub p: usize,
    #[serde(default = "default_block_size_mean")]
    pub block_size_mean: usize,
    #[serde(default = "default_block_size_jitter")]
    pub block_size_jitter: usize,
    /// Target population genotypic r-squared within a block.
    #[serde(default = "default_within_block_r2")]
    pub within_block_r2: f64,
    #[serde(default = "default_maf_range")]
    pub maf_range: (f64, f64),
    pub scenario: Scenario,
    /// Number of causal units (SNPs or clusters).
    #[serde(default = "default_ell")]
    pub ell: usize,
    /// Disease prevalence; sets the logit intercept ln(pi / (1 - pi)).
    #[serde(default = "default_prevalence")]
    pub prevalence: f64,
    /// Fraction of SNPs retained by the chip mask.
    #[serde(default = "default_chip_fraction")]
    pub chip_fraction: f64,
    pub seed: u64,
    /// Calibration target for the fitted-probability MSE.
    #[serde(default = "default_target_mse")]
    pub target_mse: f64,
    #[serde(default = "default_phenotype_replicates")]
    pub phenotype_replicates: usize,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.p < 1 {
            return Err(Error::InvalidInput(format!(
                "need n >= 2 individuals and P >= 1 SNPs (got n = {}, P = {})",
                self.n, self.p
            )));
        }
        if self.block_size_mean < 1 {
            return Err(Error::InvalidInput("block_size_mean must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.within_block_r2) {
            return Err(Error::InvalidInput(format!(
                "within_block_r2 {} must lie in [0, 1); r2 = 1 is infeasible with distinct MAFs",
                self.within_block_r2
            )));
        }
        let (lo, hi) = self.maf_range;
        if !(lo > 0.0 && lo <= hi && hi <= 0.5) {
            return Err(Error::InvalidInput(format!(
                "maf_range ({}, {}) must satisfy 0 < low <= high <= 0.5",
                lo, hi
            )));
        }
        if self.ell < 1 {
            return Err(Error::InvalidInput("ell must be >= 1".into()));
        }
        if !(self.prevalence > 0.0 && self.prevalence < 1.0) {
            return Err(Error::InvalidInput(format!(
                "prevalence {} must lie in (0, 1)",
                self.prevalence
            )));
        }
        if !(self.chip_fraction > 0.0 && self.chip_fraction <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "chip_fraction {} must lie in (0, 1]",
                self.chip_fraction
            )));
        }
        if !(self.target_mse > 0.0) {
            return Err(Error::InvalidInput("target_mse must be > 0".into()));
        }
        if self.phenotype_replicates < 1 {
            return Err(Error::InvalidInput(
                "phenotype_replicates must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalSnp {
    pub index: usize,
    pub id: String,
    pub chromosome: String,
    pub position: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalSpan {
    pub first: usize,
    pub last: usize,
    pub chromosome: String,
    pub pos_first: u64,
    pub pos_last: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearestMapped {
    pub causal_index: usize,
    pub mapped_index: usize,
    pub mapped_id: String,
    pub mapped_position: u64,
}

/// Everything the evaluator needs to score a run. All indices refer to the
/// original (pre-mask) simulated matrix; `snp_positions` lets evaluation
/// work in genomic coordinates after masking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub scenario: Scenario,
    pub beta0: f64,
    pub beta: f64,
    /// Internal block starts, each in [1, P).
    pub true_block_boundaries: Vec<usize>,
    pub causal_snps: Vec<CausalSnp>,
    pub causal_spans: Vec<CausalSpan>,
    /// Per original SNP: retained by the chip mask.
    pub mapped_mask: Vec<bool>,
    /// Nearest retained SNP for each unmapped causal SNP.
    pub nearest_mapped: Vec<NearestMapped>,
    pub snp_positions: Vec<u64>,
}

/// Mixed splitmix64 stream derivation so parallel sub-simulations stay
/// reproducible.
fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Population genotypic r-squared between two SNPs of the same block under
/// the latent-haplotype model with copy probability q.
fn pair_r2(q: f64, f: f64, m_j: f64, m_k: f64) -> f64 {
    let cov = q * q * f * (1.0 - f);
    let p_j = q * f + (1.0 - q) * m_j;
    let p_k = q * f + (1.0 - q) * m_k;
    let denom = p_j * (1.0 - p_j) * p_k * (1.0 - p_k);
    if denom <= 0.0 {
        return 1.0;
    }
    (cov * cov / denom).min(1.0)
}

fn mean_block_r2(q: f64, f: f64, mafs: &[f64]) -> f64 {
    let w = mafs.len();
    if w < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    let mut pairs = 0usize;
    for j in 0..w {
        for k in (j + 1)..w {
            total += pair_r2(q, f, mafs[j], mafs[k]);
            pairs += 1;
        }
    }
    total / pairs as f64
}

/// Copy probability giving the target mean pairwise r-squared (bisection;
/// r2 is 0 at q = 0 and 1 at q = 1 where all columns copy the latent).
fn solve_copy_probability(target: f64, f: f64, mafs: &[f64]) -> f64 {
    if target <= 0.0 || mafs.len() < 2 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mean_block_r2(mid, f, mafs) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Contiguous LD blocks of ~block_size_mean SNPs: within a block each
/// haplotype copies a latent fair draw of frequency f_b with probability q
/// and an independent per-SNP draw otherwise; across blocks everything is
/// independent. Returns the matrix and the internal block boundaries.
pub fn simulate_genotypes(cfg: &SimConfig) -> Result<(GenotypeMatrix, Vec<usize>)> {
    cfg.validate()?;
    let (n, p) = (cfg.n, cfg.p);

    // Block partition.
    let mut sizes_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 0));
    let mut sizes: Vec<usize> = Vec::new();
    let mut placed = 0usize;
    while placed < p {
        let jitter = if cfg.block_size_jitter > 0 {
            sizes_rng.random_range(0..=2 * cfg.block_size_jitter) as i64
                - cfg.block_size_jitter as i64
        } else {
            0
        };
        let size = ((cfg.block_size_mean as i64 + jitter).max(1) as usize).min(p - placed);
        sizes.push(size);
        placed += size;
    }
    let mut boundaries = Vec::with_capacity(sizes.len().saturating_sub(1));
    let mut start = 0usize;
    for &s in &sizes {
        if start > 0 {
            boundaries.push(start);
        }
        start += s;
    }

    let block_cols = par::map_indices(sizes.len(), |b| {
        let w = sizes[b];
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 1000 + b as u64));
        let (lo, hi) = cfg.maf_range;
        let f: f64 = rng.random_range(lo..=hi);
        let mafs: Vec<f64> = (0..w).map(|_| rng.random_range(lo..=hi)).collect();
        let q = solve_copy_probability(cfg.within_block_r2, f, &mafs);
        let mut cols = vec![vec![0u8; n]; w];
        for i in 0..n {
            for _copy in 0..2 {
                let h = rng.random::<f64>() < f;
                for (j, col) in cols.iter_mut().enumerate() {
                    let allele = if q > 0.0 && rng.random::<f64>() < q {
                        h
                    } else {
                        rng.random::<f64>() < mafs[j]
                    };
                    if allele {
                        col[i] += 1;
                    }
                }
            }
        }
        cols
    });

    let mut values = Vec::with_capacity(n * p);
    for cols in block_cols {
        for col in cols {
            values.extend_from_slice(&col);
        }
    }
    let snps: Vec<SnpMeta> = (0..p)
        .map(|j| SnpMeta::new(format!("snp{:06}", j), "1", 1000 * (j as u64 + 1)))
        .collect();
    let matrix = GenotypeMatrix::new(n, snps, values)?;
    Ok((matrix, boundaries))
}

/// Bernoulli draws from the logit model: the operation centers the causal
/// predictors itself, then draws y_i ~ Bernoulli(sigmoid(beta0 + beta *
/// sum_k x_ik)).
pub fn simulate_phenotype(
    x_tilde: &[Vec<f64>],
    beta0: f64,
    beta: f64,
    seed: u64,
) -> Result<Phenotype> {
    if x_tilde.is_empty() || x_tilde[0].is_empty() {
        return Err(Error::Empty("no causal predictors".into()));
    }
    let n = x_tilde[0].len();
    if x_tilde.iter().any(|c| c.len() != n) {
        return Err(Error::DimensionMismatch(
            "causal predictor columns have unequal lengths".into(),
        ));
    }
    let mut eta = vec![beta0; n];
    for col in x_tilde {
        let mean = col.iter().sum::<f64>() / n as f64;
        for (e, &v) in eta.iter_mut().zip(col) {
            *e += beta * (v - mean);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = eta
        .iter()
        .map(|&e| u8::from(rng.random::<f64>() < sigmoid(e)))
        .collect();
    Phenotype::new(values)
}

/// Calibration output: the chosen coefficient plus the (beta, mse) pairs
/// evaluated along the search path.
#[derive(Debug, Clone)]
pub struct Calibration {
    pub beta: f64,
    pub trace: Vec<(f64, f64)>,
}

const BETA_CAP: f64 = 1e4;

/// Smallest common coefficient (doubling then bisection, at most 60
/// evaluations) whose logistic fit on the causal predictors reaches the
/// target in-sample MSE between the phenotype and the fitted probabilities,
/// averaged over 3 phenotype draws.
pub fn calibrate_beta(
    x_tilde: &[Vec<f64>],
    pi: f64,
    target_mse: f64,
    seed: u64,
) -> Result<Calibration> {
    if !(target_mse > 0.0) {
        return Err(Error::InvalidInput("target_mse must be > 0".into()));
    }
    if !(pi > 0.0 && pi < 1.0) {
        return Err(Error::InvalidInput(format!(
            "prevalence {} must lie in (0, 1)",
            pi
        )));
    }
    if x_tilde.is_empty() || x_tilde[0].len() < 4 {
        return Err(Error::InvalidInput(
            "calibration needs at least one predictor over at least 4 individuals".into(),
        ));
    }
    let beta0 = (pi / (1.0 - pi)).ln();
    let n = x_tilde[0].len();
    let ell = x_tilde.len();
    let design = DMatrix::from_fn(n, 1 + ell, |i, j| {
        if j == 0 {
            1.0
        } else {
            x_tilde[j - 1][i]
        }
    });
    let penalties = DVector::zeros(1 + ell);
    let opts = IrlsOptions {
        max_iter: 50,
        ..IrlsOptions::default()
    };

    let mut trace: Vec<(f64, f64)> = Vec::new();
    let mse_of = |beta: f64, trace: &mut Vec<(f64, f64)>| -> f64 {
        let mut total = 0.0;
        for r in 0..3u64 {
            let y = simulate_phenotype(x_tilde, beta0, beta, derive_seed(seed, 100 + r))
                .expect("dimensions pre-validated");
            let yv = DVector::from_vec(y.as_f64());
            let fit = irls_primal(&design, &yv, &penalties, opts, None);
            let eta = &design * &fit.coefs;
            let mse = eta
                .iter()
                .zip(yv.iter())
                .map(|(&e, &yi)| {
                    let d = yi - sigmoid(e);
                    d * d
                })
                .sum::<f64>()
                / n as f64;
            total += mse;
        }
        let mse = total / 3.0;
        trace.push((beta, mse));
        mse
    };

    if mse_of(0.0, &mut trace) <= target_mse {
        return Ok(Calibration { beta: 0.0, trace });
    }

    // Doubling phase.
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    loop {
        let mse = mse_of(hi, &mut trace);
        if mse <= target_mse {
            break;
        }
        if hi >= BETA_CAP {
            return Err(Error::InvalidInput(format!(
                "target_mse {} unreachable at the beta cap {}; increase target_mse",
                target_mse, BETA_CAP
            )));
        }
        lo = hi;
        hi = (hi * 2.0).min(BETA_CAP);
    }

    // Bisection phase; `hi` stays feasible throughout. The trace length is
    // the evaluation count.
    while trace.len() < 60 && (hi - lo) / hi > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if mse_of(mid, &mut trace) <= target_mse {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Calibration { beta: hi, trace })
}

fn block_of(boundaries: &[usize], j: usize) -> usize {
    boundaries.partition_point(|&b| b <= j)
}

/// Pick the causal design matrix for the configured scenario.
///
/// singleSNP: `ell` uniformly sampled SNP columns, no two in one true block.
/// clusSNP: constrained-HAC on the full matrix cut to about
/// `P / block_size_mean` clusters; `ell` sampled clusters, aggregated.
pub fn make_causal(
    cfg: &SimConfig,
    g_full: &GenotypeMatrix,
    boundaries: &[usize],
) -> Result<(Vec<Vec<f64>>, GroundTruth)> {
    cfg.validate()?;
    let p = g_full.p();
    let mut truth = GroundTruth {
        scenario: cfg.scenario,
        beta0: (cfg.prevalence / (1.0 - cfg.prevalence)).ln(),
        beta: 0.0,
        true_block_boundaries: boundaries.to_vec(),
        causal_snps: Vec::new(),
        causal_spans: Vec::new(),
        mapped_mask: vec![true; p],
        nearest_mapped: Vec::new(),
        snp_positions: g_full.snps().iter().map(|s| s.position).collect(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 2));

    match cfg.scenario {
        Scenario::SingleSnp => {
            let n_blocks = boundaries.len() + 1;
            if cfg.ell > n_blocks {
                return Err(Error::InvalidInput(format!(
                    "ell = {} exceeds the {} available blocks",
                    cfg.ell, n_blocks
                )));
            }
            let mut chosen: Vec<usize> = Vec::new();
            let mut used_blocks = std::collections::HashSet::new();
            while chosen.len() < cfg.ell {
                let j = rng.random_range(0..p);
                if used_blocks.insert(block_of(boundaries, j)) {
                    chosen.push(j);
                }
            }
            chosen.sort_unstable();
            let x = chosen
                .iter()
                .map(|&j| g_full.column_f64(j))
                .collect::<Result<Vec<_>>>()?;
            truth.causal_snps = chosen
                .into_iter()
                .map(|j| {
                    let s = g_full.snp(j);
                    CausalSnp {
                        index: j,
                        id: s.id.clone(),
                        chromosome: s.chromosome.clone(),
                        position: s.position,
                    }
                })
                .collect();
            Ok((x, truth))
        }
        Scenario::ClusSnp => {
            let bandwidth = ld::DEFAULT_BANDWIDTH.min(p.saturating_sub(1)).max(1);
            let band = ld::ld_band(g_full, bandwidth)?;
            let hierarchy = hac::build(&band, &g_full.chromosome_barriers())?;
            let g_target = ((p as f64 / cfg.block_size_mean as f64).round() as usize)
                .clamp(hierarchy.n_trees().max(1), p);
            if cfg.ell > g_target {
                return Err(Error::InvalidInput(format!(
                    "ell = {} exceeds the {} available clusters",
                    cfg.ell, g_target
                )));
            }
            let labels = hac::cut(&hierarchy, g_target)?;
            let aggregated = aggregate_raw(g_full, &labels)?;
            let mut chosen: Vec<usize> = Vec::new();
            while chosen.len() < cfg.ell {
                let k = rng.random_range(0..g_target);
                if !chosen.contains(&k) {
                    chosen.push(k);
                }
            }
            chosen.sort_unstable();
            let x: Vec<Vec<f64>> = chosen
                .iter()
                .map(|&k| aggregated.column(k).to_vec())
                .collect();
            truth.causal_spans = chosen
                .into_iter()
                .map(|k| {
                    let (first, last) = aggregated.cluster_spans()[k];
                    CausalSpan {
                        first,
                        last,
                        chromosome: g_full.snp(first).chromosome.clone(),
                        pos_first: g_full.snp(first).position,
                        pos_last: g_full.snp(last).position,
                    }
                })
                .collect();
            Ok((x, truth))
        }
    }
}

/// Retain a uniform SNP subset in genomic order and annotate the ground
/// truth: the mask plus, for every unmapped causal SNP, its nearest mapped
/// SNP by base-pair distance (ties toward the smaller position).
pub fn mask_to_chip(
    g_full: &GenotypeMatrix,
    fraction: f64,
    seed: u64,
    truth: &GroundTruth,
) -> Result<(GenotypeMatrix, GroundTruth)> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "chip fraction {} must lie in (0, 1]",
            fraction
        )));
    }
    let p = g_full.p();
    let keep = ((fraction * p as f64).round() as usize).clamp(1, p);
    let mut kept: Vec<usize> = if keep == p {
        (0..p).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut chosen = rand::seq::index::sample(&mut rng, p, keep).into_vec();
        chosen.sort_unstable();
        chosen
    };
    kept.dedup();

    // Every chromosome must survive.
    {
        let mut kept_it = kept.iter().peekable();
        let mut j = 0usize;
        while j < p {
            let chrom = &g_full.snp(j).chromosome;
            let mut end = j;
            while end + 1 < p && &g_full.snp(end + 1).chromosome == chrom {
                end += 1;
            }
            let mut any = false;
            while let Some(&&k) = kept_it.peek() {
                if k > end {
                    break;
                }
                any = true;
                kept_it.next();
            }
            if !any {
                return Err(Error::InvalidInput(format!(
                    "chip fraction {} leaves chromosome {} with no SNPs",
                    fraction, chrom
                )));
            }
            j = end + 1;
        }
    }

    let masked = g_full.select_columns(&kept)?;
    let mut updated = truth.clone();
    updated.mapped_mask = vec![false; p];
    for &k in &kept {
        updated.mapped_mask[k] = true;
    }
    updated.nearest_mapped = truth
        .causal_snps
        .iter()
        .filter(|c| !updated.mapped_mask[c.index])
        .map(|c| {
            let best = kept
                .iter()
                .filter(|&&k| g_full.snp(k).chromosome == c.chromosome)
                .min_by(|&&a, &&b| {
                    let da = g_full.snp(a).position.abs_diff(c.position);
                    let db = g_full.snp(b).position.abs_diff(c.position);
                    da.cmp(&db)
                        .then(g_full.snp(a).position.cmp(&g_full.snp(b).position))
                })
                .expect("every chromosome retains at least one SNP");
            let s = g_full.snp(*best);
            NearestMapped {
                causal_index: c.index,
                mapped_index: *best,
                mapped_id: s.id.clone(),
                mapped_position: s.position,
            }
        })
        .collect();
    Ok((masked, updated))
}

/// A complete simulated experiment: masked genotypes, phenotype replicates,
/// and the annotated ground truth.
#[derive(Debug, Clone)]
pub struct SimBundle {
    pub config: SimConfig,
    pub genotypes: GenotypeMatrix,
    pub phenotypes: Vec<Phenotype>,
    pub truth: GroundTruth,
}

/// End-to-end simulation: genotypes, causal design, coefficient
/// calibration, phenotype replicates, chip masking.
pub fn simulate_bundle(cfg: &SimConfig) -> Result<SimBundle> {
    cfg.validate()?;
    let (g_full, boundaries) = simulate_genotypes(cfg)?;
    let (x_tilde, mut truth) = make_causal(cfg, &g_full, &boundaries)?;
    let calibration = calibrate_beta(
        &x_tilde,
        cfg.prevalence,
        cfg.target_mse,
        derive_seed(cfg.seed, 3),
    )?;
    truth.beta = calibration.beta;
    let phenotypes = (0..cfg.phenotype_replicates)
        .map(|r| {
            simulate_phenotype(
                &x_tilde,
                truth.beta0,
                truth.beta,
                derive_seed(cfg.seed, 4000 + r as u64),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let (masked, truth) = mask_to_chip(&g_full, cfg.chip_fraction, derive_seed(cfg.seed, 5), &truth)?;
    Ok(SimBundle {
        config: cfg.clone(),
        genotypes: masked,
        phenotypes,
        truth,
    })
}

/// Write `genotypes.tsv`, `phenotype_<r>.txt`, and `ground_truth.json`
/// under `dir`; returns the written paths.
pub fn write_bundle(dir: &Path, bundle: &SimBundle) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut paths = Vec::new();

    let gpath = dir.join("genotypes.tsv");
    let mut gfile = std::io::BufWriter::new(fs::File::create(&gpath)?);
    bundle.genotypes.write_tsv(&mut gfile)?;
    paths.push(gpath);

    for (r, y) in bundle.phenotypes.iter().enumerate() {
        let ppath = dir.join(format!("phenotype_{}.txt", r));
        let mut pfile = std::io::BufWriter::new(fs::File::create(&ppath)?);
        y.write(&mut pfile)?;
        paths.push(ppath);
    }

    let tpath = dir.join("ground_truth.json");
    let tfile = std::io::BufWriter::new(fs::File::create(&tpath)?);
    serde_json::to_writer_pretty(tfile, &bundle.truth)
        .map_err(|e| Error::InvalidInput(format!("ground truth serialization: {}", e)))?;
    paths.push(tpath);
    Ok(paths)
}

/// Parse a ground-truth JSON written by [`write_bundle`].
pub fn read_ground_truth(path: &Path) -> Result<GroundTruth> {
    let file = fs::File::open(path)?;
    serde_json::from_reader(std::io::BufReader::new(file))
        .map_err(|e| Error::Parse(format!("ground truth {}: {}", path.display(), e)))
}
