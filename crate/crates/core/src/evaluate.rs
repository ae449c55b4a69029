//! Score association outputs against simulation ground truth and compute
//! recall (power) and precision.
//!
//! Matching runs in genomic coordinates so it survives chip masking. An
//! unmapped causal SNP is credited through its nearest mapped SNP. The four
//! true-positive rules:
//!
//! * SMA, SNP level: a significant SNP is TP iff it is a causal SNP
//!   (singleSNP) or lies inside a causal cluster span (clusSNP).
//! * SASA, cluster level: a significant aggregated variable is TP iff its
//!   span contains a causal SNP (singleSNP) or overlaps a causal span
//!   (clusSNP); overlap means at least one shared position.
//! * SASA, SNP level: a significant cluster calls each of its member SNPs;
//!   members are then judged by the SNP-level rule.
//! * Cluster-level evaluation of SMA is undefined.

use std::collections::HashSet;
use std::io::Write;

use crate::assoc::AssociationResult;
use crate::error::{Error, Result};
use crate::simulate::{GroundTruth, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalUnit {
    SnpLevel,
    ClusterLevel,
}

impl EvalUnit {
    pub fn as_str(&self) -> &'static str {
        match self {
            EvalUnit::SnpLevel => "snp",
            EvalUnit::ClusterLevel => "cluster",
        }
    }
}

impl std::str::FromStr for EvalUnit {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "snp" | "snp_level" => Ok(EvalUnit::SnpLevel),
            "cluster" | "cluster_level" => Ok(EvalUnit::ClusterLevel),
            _ => Err(Error::InvalidInput(format!("unknown evaluation unit {:?}", s))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMethod {
    Sma,
    Sasa,
}

impl EvalMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            EvalMethod::Sma => "sma",
            EvalMethod::Sasa => "sasa",
        }
    }
}

impl std::str::FromStr for EvalMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sma" => Ok(EvalMethod::Sma),
            "sasa" => Ok(EvalMethod::Sasa),
            _ => Err(Error::InvalidInput(format!("unknown method {:?}", s))),
        }
    }
}

/// Binary-decision counts over the tested units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_count: usize,
    pub unit: EvalUnit,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_count
    }
}

/// Recall (power) = TP / (TP + FN); undefined when no causal unit was tested.
pub fn recall(c: &ConfusionCounts) -> Option<f64> {
    let denom = c.tp + c.fn_count;
    (denom > 0).then(|| c.tp as f64 / denom as f64)
}

/// Precision = TP / (TP + FP); undefined when nothing was called
/// significant (excluded from averages rather than counted as zero).
pub fn precision(c: &ConfusionCounts) -> Option<f64> {
    let denom = c.tp + c.fp;
    (denom > 0).then(|| c.tp as f64 / denom as f64)
}

/// Per-position causal predicate in genomic coordinates.
struct CausalIndex {
    scenario: Scenario,
    positions: HashSet<u64>,
    spans: Vec<(u64, u64)>,
}

impl CausalIndex {
    fn new(truth: &GroundTruth) -> Self {
        let mut positions = HashSet::new();
        for c in &truth.causal_snps {
            if truth.mapped_mask.get(c.index).copied().unwrap_or(true) {
                positions.insert(c.position);
            } else if let Some(nm) = truth
                .nearest_mapped
                .iter()
                .find(|nm| nm.causal_index == c.index)
            {
                positions.insert(nm.mapped_position);
            }
        }
        let spans = truth
            .causal_spans
            .iter()
            .map(|s| (s.pos_first, s.pos_last))
            .collect();
        CausalIndex {
            scenario: truth.scenario,
            positions,
            spans,
        }
    }

    fn snp_is_causal(&self, pos: u64) -> bool {
        match self.scenario {
            Scenario::SingleSnp => self.positions.contains(&pos),
            Scenario::ClusSnp => self.spans.iter().any(|&(a, b)| (a..=b).contains(&pos)),
        }
    }

    fn cluster_is_causal(&self, pos_first: u64, pos_last: u64) -> bool {
        match self.scenario {
            Scenario::SingleSnp => self
                .positions
                .iter()
                .any(|&p| (pos_first..=pos_last).contains(&p)),
            Scenario::ClusSnp => self
                .spans
                .iter()
                .any(|&(a, b)| pos_first <= b && a <= pos_last),
        }
    }
}

/// Tally the confusion counts for one association run against the truth.
pub fn match_results(
    res: &AssociationResult,
    truth: &GroundTruth,
    method: EvalMethod,
    unit: EvalUnit,
) -> Result<ConfusionCounts> {
    if method == EvalMethod::Sma && unit == EvalUnit::ClusterLevel {
        return Err(Error::InvalidInput(
            "cluster-level evaluation is undefined for SMA".into(),
        ));
    }
    let causal = CausalIndex::new(truth);
    let mut counts = ConfusionCounts {
        tp: 0,
        fp: 0,
        tn: 0,
        fn_count: 0,
        unit,
    };
    let mut tally = |called: bool, is_causal: bool| match (called, is_causal) {
        (true, true) => counts.tp += 1,
        (true, false) => counts.fp += 1,
        (false, true) => counts.fn_count += 1,
        (false, false) => counts.tn += 1,
    };

    match (method, unit) {
        (EvalMethod::Sma, EvalUnit::SnpLevel) => {
            for r in &res.records {
                tally(r.significant, causal.snp_is_causal(r.pos_first));
            }
        }
        (EvalMethod::Sasa, EvalUnit::ClusterLevel) => {
            for r in &res.records {
                tally(r.significant, causal.cluster_is_causal(r.pos_first, r.pos_last));
            }
        }
        (EvalMethod::Sasa, EvalUnit::SnpLevel) => {
            // Analyzed-column positions, in masked order.
            let analyzed: Vec<u64> = truth
                .snp_positions
                .iter()
                .zip(&truth.mapped_mask)
                .filter(|&(_, &mapped)| mapped)
                .map(|(&p, _)| p)
                .collect();
            for r in &res.records {
                let (first, last) = r.column_span.ok_or_else(|| {
                    Error::InvalidInput(format!(
                        "record {:?} carries no cluster span; SNP-level SASA evaluation \
                         needs cluster_k:first-last ids",
                        r.id
                    ))
                })?;
                if last >= analyzed.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "cluster span {}-{} exceeds the {} analyzed SNPs",
                        first,
                        last,
                        analyzed.len()
                    )));
                }
                for &pos in &analyzed[first..=last] {
                    tally(r.significant, causal.snp_is_causal(pos));
                }
            }
        }
        (EvalMethod::Sma, EvalUnit::ClusterLevel) => unreachable!(),
    }
    Ok(counts)
}

/// One row of the scores table.
#[derive(Debug, Clone)]
pub struct ScoreRow {
    pub scenario: Scenario,
    pub ell: usize,
    pub method: EvalMethod,
    pub unit: EvalUnit,
    pub recall: Option<f64>,
    pub precision: Option<f64>,
    pub n_replicates: usize,
}

/// Arithmetic mean of the defined values only; `None` when every replicate
/// was undefined.
pub fn mean_defined(values: &[Option<f64>]) -> Option<f64> {
    let defined: Vec<f64> = values.iter().flatten().copied().collect();
    if defined.is_empty() {
        None
    } else {
        Some(defined.iter().sum::<f64>() / defined.len() as f64)
    }
}

/// Average replicate confusion counts into one score row.
pub fn average_counts(
    scenario: Scenario,
    ell: usize,
    method: EvalMethod,
    unit: EvalUnit,
    counts: &[ConfusionCounts],
) -> ScoreRow {
    let recalls: Vec<Option<f64>> = counts.iter().map(recall).collect();
    let precisions: Vec<Option<f64>> = counts.iter().map(precision).collect();
    ScoreRow {
        scenario,
        ell,
        method,
        unit,
        recall: mean_defined(&recalls),
        precision: mean_defined(&precisions),
        n_replicates: counts.len(),
    }
}

/// TSV: `scenario ell method unit recall precision n_replicates`;
/// undefined values print as NA.
pub fn write_scores_tsv<W: Write>(rows: &[ScoreRow], mut w: W) -> Result<()> {
    writeln!(w, "scenario\tell\tmethod\tunit\trecall\tprecision\tn_replicates")?;
    let fmt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| format!("{}", x));
    for r in rows {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.scenario.as_str(),
            r.ell,
            r.method.as_str(),
            r.unit.as_str(),
            fmt(r.recall),
            fmt(r.precision),
            r.n_replicates
        )?;
    }
    Ok(())
}
