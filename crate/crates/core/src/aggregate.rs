//! Dimension reduction: collapse each contiguous SNP cluster into one
//! aggregated-SNP variable (the within-cluster minor-allele count), then
//! center and scale to unit variance.

use std::io::Write;

use crate::error::{Error, Result};
use crate::genotype::GenotypeMatrix;
use crate::hac::ClusterAssignment;
use crate::par;

/// n x G aggregated predictors with their source column spans.
///
/// Constant (degenerate) columns are kept as all-zero columns after
/// standardization and flagged, so `cluster_spans` stays aligned; degenerate
/// columns are excluded from downstream model fitting instead of dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedMatrix {
    n: usize,
    g: usize,
    /// Column-major.
    values: Vec<f64>,
    /// Per column: (first, last) source SNP index, inclusive.
    cluster_spans: Vec<(usize, usize)>,
    degenerate: Vec<bool>,
    standardized: bool,
}

impl AggregatedMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn column(&self, k: usize) -> &[f64] {
        &self.values[k * self.n..(k + 1) * self.n]
    }

    pub fn cluster_spans(&self) -> &[(usize, usize)] {
        &self.cluster_spans
    }

    pub fn degenerate(&self) -> &[bool] {
        &self.degenerate
    }

    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    pub fn non_degenerate_columns(&self) -> Vec<usize> {
        (0..self.g).filter(|&k| !self.degenerate[k]).collect()
    }

    /// Restrict to the given rows (for train/test splits).
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if let Some(&bad) = rows.iter().find(|&&i| i >= self.n) {
            return Err(Error::InvalidInput(format!(
                "row index {} out of range (n = {})",
                bad, self.n
            )));
        }
        let mut values = Vec::with_capacity(rows.len() * self.g);
        for k in 0..self.g {
            let col = self.column(k);
            values.extend(rows.iter().map(|&i| col[i]));
        }
        Ok(AggregatedMatrix {
            n: rows.len(),
            g: self.g,
            values,
            cluster_spans: self.cluster_spans.clone(),
            degenerate: self.degenerate.clone(),
            standardized: self.standardized,
        })
    }

    /// TSV dump with one `cluster_k:first-last` header per column.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        let headers: Vec<String> = self
            .cluster_spans
            .iter()
            .enumerate()
            .map(|(k, &(a, b))| format!("cluster_{}:{}-{}", k, a, b))
            .collect();
        writeln!(w, "{}", headers.join("\t"))?;
        for i in 0..self.n {
            let row: Vec<String> = (0..self.g)
                .map(|k| format!("{}", self.column(k)[i]))
                .collect();
            writeln!(w, "{}", row.join("\t"))?;
        }
        Ok(())
    }
}

/// Per-cluster minor-allele counts: `D[i][g] = sum of X[i][j] over j in g`.
/// Values are exact integers prior to scaling.
pub fn aggregate_raw(
    g_mat: &GenotypeMatrix,
    assignment: &ClusterAssignment,
) -> Result<AggregatedMatrix> {
    if assignment.p() != g_mat.p() {
        return Err(Error::DimensionMismatch(format!(
            "assignment covers {} SNPs but the matrix has {}",
            assignment.p(),
            g_mat.p()
        )));
    }
    if !g_mat.is_complete() {
        return Err(Error::InvalidInput(
            "aggregation requires a complete matrix; impute first".into(),
        ));
    }
    let n = g_mat.n();
    let spans = assignment.spans();
    let columns = par::map_indices(spans.len(), |k| {
        let (first, last) = spans[k];
        let mut acc = vec![0.0f64; n];
        for j in first..=last {
            let col = g_mat.column_raw(j);
            for (a, &v) in acc.iter_mut().zip(col) {
                *a += f64::from(v);
            }
        }
        acc
    });
    let mut values = Vec::with_capacity(n * spans.len());
    for c in columns {
        values.extend_from_slice(&c);
    }
    Ok(AggregatedMatrix {
        n,
        g: spans.len(),
        values,
        cluster_spans: spans,
        degenerate: vec![false; assignment.g()],
        standardized: false,
    })
}

/// Center each column and divide by its sample standard deviation
/// (denominator n-1). Constant columns become all zeros and are flagged
/// degenerate. Idempotent on non-degenerate columns.
pub fn standardize(d: &AggregatedMatrix) -> AggregatedMatrix {
    let n = d.n;
    let cols = par::map_indices(d.g, |k| {
        let col = d.column(k);
        let mean = col.iter().sum::<f64>() / n as f64;
        let mut centered: Vec<f64> = col.iter().map(|v| v - mean).collect();
        let ss: f64 = centered.iter().map(|v| v * v).sum();
        if n < 2 || ss == 0.0 {
            return (vec![0.0; n], true);
        }
        let sd = (ss / (n - 1) as f64).sqrt();
        for v in &mut centered {
            *v /= sd;
        }
        (centered, false)
    });
    let mut values = Vec::with_capacity(n * d.g);
    let mut degenerate = Vec::with_capacity(d.g);
    for (k, (col, degen)) in cols.into_iter().enumerate() {
        values.extend_from_slice(&col);
        degenerate.push(degen || d.degenerate[k]);
    }
    AggregatedMatrix {
        n,
        g: d.g,
        values,
        cluster_spans: d.cluster_spans.clone(),
        degenerate,
        standardized: true,
    }
}
