//! Pairwise linkage disequilibrium (genotypic r-squared on unphased 0/1/2
//! data) and the banded dissimilarity matrix consumed by the constrained
//! clustering.

use std::io::Write;

use crate::error::{Error, Result};
use crate::genotype::GenotypeMatrix;
use crate::par;

/// Default bandwidth, in SNPs, for the banded dissimilarity. Large relative
/// to typical LD block sizes, small relative to genome-wide P. Pairs beyond
/// the band are treated as maximally dissimilar (d = 1).
pub const DEFAULT_BANDWIDTH: usize = 500;

/// Banded dissimilarity d(j,j') = 1 - r^2(j,j') for |j-j'| <= bandwidth.
///
/// Entries are clamped to [0,1]; pairs that straddle a chromosome boundary
/// and pairs beyond the band are maximally dissimilar (d = 1).
#[derive(Debug, Clone)]
pub struct LdDissimilarity {
    p: usize,
    bandwidth: usize,
    /// `band[j * bandwidth + (delta - 1)]` holds d(j, j + delta) for
    /// delta in 1..=bandwidth; entries past the matrix edge are 1.
    band: Vec<f64>,
}

impl LdDissimilarity {
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// Dissimilarity between two SNP indices: 0 on the diagonal, the stored
    /// band value within the band, 1 beyond it.
    pub fn get(&self, j: usize, j2: usize) -> f64 {
        let (lo, hi) = if j <= j2 { (j, j2) } else { (j2, j) };
        let delta = hi - lo;
        if delta == 0 {
            0.0
        } else if delta <= self.bandwidth {
            self.band[lo * self.bandwidth + (delta - 1)]
        } else {
            1.0
        }
    }

    /// Build from an arbitrary symmetric dissimilarity function. Values are
    /// clamped into [0,1] (tolerance 1e-12; anything further out is an
    /// input error).
    pub fn from_fn(
        p: usize,
        bandwidth: usize,
        d: impl Fn(usize, usize) -> f64,
    ) -> Result<Self> {
        if p == 0 {
            return Err(Error::Empty("dissimilarity over zero SNPs".into()));
        }
        if bandwidth == 0 {
            return Err(Error::InvalidInput("bandwidth must be >= 1".into()));
        }
        let mut band = vec![1.0; p * bandwidth];
        for j in 0..p {
            for delta in 1..=bandwidth {
                let j2 = j + delta;
                if j2 >= p {
                    break;
                }
                band[j * bandwidth + (delta - 1)] = clamp_unit(d(j, j2), j, j2)?;
            }
        }
        Ok(LdDissimilarity { p, bandwidth, band })
    }

    /// TSV dump of in-band pairs: `j<TAB>j2<TAB>d`, one header line.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "j\tj2\td")?;
        for j in 0..self.p {
            for delta in 1..=self.bandwidth {
                let j2 = j + delta;
                if j2 >= self.p {
                    break;
                }
                writeln!(w, "{}\t{}\t{}", j, j2, self.get(j, j2))?;
            }
        }
        Ok(())
    }
}

fn clamp_unit(v: f64, j: usize, j2: usize) -> Result<f64> {
    if !v.is_finite() || v < -1e-12 || v > 1.0 + 1e-12 {
        return Err(Error::InvalidInput(format!(
            "dissimilarity {} for pair ({}, {}) is outside [0,1]",
            v, j, j2
        )));
    }
    Ok(v.clamp(0.0, 1.0))
}

/// Per-column mean-centered values scaled to unit L2 norm, for fast r.
struct UnitColumns {
    cols: Vec<Vec<f64>>,
}

fn unit_columns(g: &GenotypeMatrix) -> Result<UnitColumns> {
    let n = g.n();
    let cols = par::try_map_indices(g.p(), |j| {
        let raw = g.column_f64(j)?;
        let mean = raw.iter().sum::<f64>() / n as f64;
        let mut centered: Vec<f64> = raw.iter().map(|v| v - mean).collect();
        let norm = centered.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::ConstantColumn {
                index: j,
                id: g.snp(j).id.clone(),
            });
        }
        for v in &mut centered {
            *v /= norm;
        }
        Ok(centered)
    })?;
    Ok(UnitColumns { cols })
}

fn r2_from_units(a: &[f64], b: &[f64]) -> f64 {
    let r: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    (r * r).clamp(0.0, 1.0)
}

/// Squared Pearson correlation of two complete, non-constant genotype
/// columns (composite genotypic LD).
pub fn r_squared(g: &GenotypeMatrix, j: usize, j2: usize) -> Result<f64> {
    let n = g.n() as f64;
    let col = |idx: usize| -> Result<(Vec<f64>, f64)> {
        let raw = g.column_f64(idx)?;
        let mean = raw.iter().sum::<f64>() / n;
        let centered: Vec<f64> = raw.iter().map(|v| v - mean).collect();
        let norm = centered.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::ConstantColumn {
                index: idx,
                id: g.snp(idx).id.clone(),
            });
        }
        Ok((centered, norm))
    };
    let (ca, na) = col(j)?;
    let (cb, nb) = col(j2)?;
    let r: f64 = ca.iter().zip(&cb).map(|(x, y)| x * y).sum::<f64>() / (na * nb);
    Ok((r * r).clamp(0.0, 1.0))
}

/// Banded dissimilarity over a complete matrix with all columns
/// non-constant. Pairs on different chromosomes are forced to d = 1.
pub fn ld_band(g: &GenotypeMatrix, bandwidth: usize) -> Result<LdDissimilarity> {
    let p = g.p();
    if bandwidth == 0 {
        return Err(Error::InvalidInput("bandwidth must be >= 1".into()));
    }
    let units = unit_columns(g)?;
    let chrom_run = chromosome_run_ids(g);
    let rows = par::map_indices(p, |j| {
        let mut row = vec![1.0; bandwidth];
        for delta in 1..=bandwidth {
            let j2 = j + delta;
            if j2 >= p {
                break;
            }
            if chrom_run[j] == chrom_run[j2] {
                row[delta - 1] = (1.0 - r2_from_units(&units.cols[j], &units.cols[j2]))
                    .clamp(0.0, 1.0);
            }
        }
        row
    });
    let mut band = Vec::with_capacity(p * bandwidth);
    for row in rows {
        band.extend_from_slice(&row);
    }
    Ok(LdDissimilarity { p, bandwidth, band })
}

/// Map each column to a chromosome run index (0-based, increasing).
fn chromosome_run_ids(g: &GenotypeMatrix) -> Vec<u32> {
    let mut ids = Vec::with_capacity(g.p());
    let mut cur = 0u32;
    for j in 0..g.p() {
        if j > 0 && g.snp(j).chromosome != g.snp(j - 1).chromosome {
            cur += 1;
        }
        ids.push(cur);
    }
    ids
}
