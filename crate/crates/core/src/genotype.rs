//! Genotype, phenotype, and covariate data model: ingestion, quality
//! control, most-frequent-value imputation, and PCA covariate extraction.
//!
//! Genotypes are ordinal minor-allele counts in {0,1,2}; missing entries are
//! kept explicit. Storage is column-major because every numeric consumer
//! (LD, PCA, association tests) walks columns.

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Read, Write};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::par;

/// Missing-genotype sentinel in the packed value buffer.
const MISSING: u8 = u8::MAX;

/// Number of principal components used as covariates when nothing else is
/// requested (standard population-stratification adjustment).
pub const DEFAULT_NUM_PCS: usize = 5;

/// Per-SNP metadata. `index` is the 0-based column order and is assigned by
/// [`GenotypeMatrix::new`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnpMeta {
    pub id: String,
    pub chromosome: String,
    pub position: u64,
    pub index: usize,
}

impl SnpMeta {
    pub fn new(id: impl Into<String>, chromosome: impl Into<String>, position: u64) -> Self {
        SnpMeta {
            id: id.into(),
            chromosome: chromosome.into(),
            position,
            index: 0,
        }
    }
}

/// n individuals x P SNPs, entries in {0,1,2} or missing.
#[derive(Debug, Clone, PartialEq)]
pub struct GenotypeMatrix {
    n: usize,
    snps: Vec<SnpMeta>,
    /// Column-major, `MISSING` marks a missing call.
    values: Vec<u8>,
}

/// Input format accepted by [`load_genotypes`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenotypeFormat {
    /// Two header lines (SNP ids, then `chrom:pos`), then one individual per
    /// row with tokens in {0,1,2,NA}, tab-separated.
    Tsv,
    /// PLINK additive recode (`.raw`): header `FID IID PAT MAT SEX PHENOTYPE
    /// snp1 ...`, whitespace-separated, genotype tokens 0/1/2/NA.
    PlinkRaw,
}

impl GenotypeMatrix {
    /// Build from column-major values (`MISSING` = 255 for missing calls).
    ///
    /// Validates entry domain, id uniqueness, and genomic ordering:
    /// chromosomes must form contiguous runs with strictly increasing
    /// positions inside each run. `index` fields are overwritten with the
    /// actual column order.
    pub fn new(n: usize, mut snps: Vec<SnpMeta>, values: Vec<u8>) -> Result<Self> {
        let p = snps.len();
        if n == 0 {
            return Err(Error::Empty("genotype matrix has no individuals".into()));
        }
        if p == 0 {
            return Err(Error::Empty("genotype matrix has no SNPs".into()));
        }
        if values.len() != n * p {
            return Err(Error::DimensionMismatch(format!(
                "expected {} values for {}x{} matrix, got {}",
                n * p,
                n,
                p,
                values.len()
            )));
        }
        for (k, &v) in values.iter().enumerate() {
            if v > 2 && v != MISSING {
                return Err(Error::InvalidInput(format!(
                    "genotype value {} out of range at row {}, column {}",
                    v,
                    k % n,
                    k / n
                )));
            }
        }
        let mut seen_ids = HashSet::with_capacity(p);
        for s in &snps {
            if !seen_ids.insert(s.id.clone()) {
                return Err(Error::InvalidInput(format!("duplicate SNP id {:?}", s.id)));
            }
        }
        let mut finished_chroms: HashSet<&str> = HashSet::new();
        for j in 1..p {
            let (prev, cur) = (&snps[j - 1], &snps[j]);
            if prev.chromosome == cur.chromosome {
                if cur.position <= prev.position {
                    return Err(Error::InvalidInput(format!(
                        "positions not strictly increasing on chromosome {} at column {} \
                         ({} after {})",
                        cur.chromosome, j, cur.position, prev.position
                    )));
                }
            } else {
                finished_chroms.insert(prev.chromosome.as_str());
                if finished_chroms.contains(cur.chromosome.as_str()) {
                    return Err(Error::InvalidInput(format!(
                        "chromosome {} reappears at column {}; chromosomes must be contiguous",
                        cur.chromosome, j
                    )));
                }
            }
        }
        for (j, s) in snps.iter_mut().enumerate() {
            s.index = j;
        }
        Ok(GenotypeMatrix { n, snps, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.snps.len()
    }

    pub fn snps(&self) -> &[SnpMeta] {
        &self.snps
    }

    pub fn snp(&self, j: usize) -> &SnpMeta {
        &self.snps[j]
    }

    pub fn get(&self, i: usize, j: usize) -> Option<u8> {
        let v = self.values[j * self.n + i];
        (v != MISSING).then_some(v)
    }

    /// Raw column slice; missing entries are the 255 sentinel.
    pub(crate) fn column_raw(&self, j: usize) -> &[u8] {
        &self.values[j * self.n..(j + 1) * self.n]
    }

    pub fn n_missing(&self) -> usize {
        self.values.iter().filter(|&&v| v == MISSING).count()
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(|&v| v != MISSING)
    }

    /// Column as f64; errors if any entry is missing.
    pub fn column_f64(&self, j: usize) -> Result<Vec<f64>> {
        self.column_raw(j)
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                if v == MISSING {
                    Err(Error::InvalidInput(format!(
                        "missing genotype at row {}, column {} ({})",
                        i, j, self.snps[j].id
                    )))
                } else {
                    Ok(f64::from(v))
                }
            })
            .collect()
    }

    /// Column indices where the chromosome changes, each in `[1, P)`.
    pub fn chromosome_barriers(&self) -> Vec<usize> {
        (1..self.p())
            .filter(|&j| self.snps[j].chromosome != self.snps[j - 1].chromosome)
            .collect()
    }

    pub fn n_chromosomes(&self) -> usize {
        self.chromosome_barriers().len() + 1
    }

    /// New matrix restricted to the given row indices (order preserved as given).
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty("row selection is empty".into()));
        }
        if let Some(&bad) = rows.iter().find(|&&i| i >= self.n) {
            return Err(Error::InvalidInput(format!(
                "row index {} out of range (n = {})",
                bad, self.n
            )));
        }
        let p = self.p();
        let mut values = Vec::with_capacity(rows.len() * p);
        for j in 0..p {
            let col = self.column_raw(j);
            values.extend(rows.iter().map(|&i| col[i]));
        }
        GenotypeMatrix::new(rows.len(), self.snps.clone(), values)
    }

    /// New matrix restricted to the given column indices (must be strictly
    /// increasing). SNP metadata keeps the original ids and positions.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        if cols.is_empty() {
            return Err(Error::Empty("column selection is empty".into()));
        }
        if cols.windows(2).any(|w| w[1] <= w[0]) || *cols.last().unwrap() >= self.p() {
            return Err(Error::InvalidInput(
                "column selection must be strictly increasing and in range".into(),
            ));
        }
        let mut snps = Vec::with_capacity(cols.len());
        let mut values = Vec::with_capacity(cols.len() * self.n);
        for &j in cols {
            snps.push(self.snps[j].clone());
            values.extend_from_slice(self.column_raw(j));
        }
        GenotypeMatrix::new(self.n, snps, values)
    }

    /// Write the two-header TSV layout. A complete matrix round-trips
    /// bit-identically through [`load_genotypes`].
    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        let ids: Vec<&str> = self.snps.iter().map(|s| s.id.as_str()).collect();
        writeln!(w, "{}", ids.join("\t"))?;
        let locs: Vec<String> = self
            .snps
            .iter()
            .map(|s| format!("{}:{}", s.chromosome, s.position))
            .collect();
        writeln!(w, "{}", locs.join("\t"))?;
        let mut line = String::new();
        for i in 0..self.n {
            line.clear();
            for j in 0..self.p() {
                if j > 0 {
                    line.push('\t');
                }
                match self.get(i, j) {
                    Some(v) => line.push(char::from(b'0' + v)),
                    None => line.push_str("NA"),
                }
            }
            writeln!(w, "{}", line)?;
        }
        Ok(())
    }
}

/// Case-control phenotype, entries in {0,1} (1 = case).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Phenotype {
    values: Vec<u8>,
}

impl Phenotype {
    pub fn new(values: Vec<u8>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("phenotype has no individuals".into()));
        }
        if let Some(pos) = values.iter().position(|&v| v > 1) {
            return Err(Error::InvalidInput(format!(
                "phenotype value {} at row {} is not in {{0,1}}",
                values[pos], pos
            )));
        }
        Ok(Phenotype { values })
    }

    /// One {0,1} token per line, order matching individuals.
    pub fn load<R: Read>(reader: R) -> Result<Self> {
        let mut values = Vec::new();
        for (lineno, line) in BufReader::new(reader).lines().enumerate() {
            let line = line?;
            let tok = line.trim();
            if tok.is_empty() {
                continue;
            }
            match tok {
                "0" => values.push(0),
                "1" => values.push(1),
                _ => {
                    return Err(Error::Parse(format!(
                        "invalid phenotype token {:?} at line {}",
                        tok,
                        lineno + 1
                    )))
                }
            }
        }
        Phenotype::new(values)
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        for &v in &self.values {
            writeln!(w, "{}", v)?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn n_cases(&self) -> usize {
        self.values.iter().filter(|&&v| v == 1).count()
    }

    pub fn n_controls(&self) -> usize {
        self.len() - self.n_cases()
    }

    pub fn both_classes_present(&self) -> bool {
        self.n_cases() > 0 && self.n_controls() > 0
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&v| f64::from(v)).collect()
    }

    pub fn select(&self, rows: &[usize]) -> Result<Self> {
        if let Some(&bad) = rows.iter().find(|&&i| i >= self.len()) {
            return Err(Error::InvalidInput(format!(
                "row index {} out of range (n = {})",
                bad,
                self.len()
            )));
        }
        Phenotype::new(rows.iter().map(|&i| self.values[i]).collect())
    }
}

/// Real-valued covariates, centered column by column on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariateMatrix {
    n: usize,
    /// Column-major.
    values: Vec<f64>,
    labels: Vec<String>,
}

impl CovariateMatrix {
    /// Empty covariate set for n individuals (C = 0).
    pub fn empty(n: usize) -> Self {
        CovariateMatrix {
            n,
            values: Vec::new(),
            labels: Vec::new(),
        }
    }

    /// Centers every column; the stored columns always have mean 0.
    pub fn new(n: usize, columns: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let mut values = Vec::with_capacity(n * columns.len());
        let mut labels = Vec::with_capacity(columns.len());
        for (label, mut col) in columns {
            if col.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "covariate {:?} has {} rows, expected {}",
                    label,
                    col.len(),
                    n
                )));
            }
            let mean = col.iter().sum::<f64>() / n as f64;
            for v in &mut col {
                *v -= mean;
            }
            values.extend_from_slice(&col);
            labels.push(label);
        }
        Ok(CovariateMatrix { n, values, labels })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn c(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn column(&self, k: usize) -> &[f64] {
        &self.values[k * self.n..(k + 1) * self.n]
    }

    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if let Some(&bad) = rows.iter().find(|&&i| i >= self.n) {
            return Err(Error::InvalidInput(format!(
                "row index {} out of range (n = {})",
                bad, self.n
            )));
        }
        let columns = (0..self.c())
            .map(|k| {
                let col = self.column(k);
                (
                    self.labels[k].clone(),
                    rows.iter().map(|&i| col[i]).collect(),
                )
            })
            .collect();
        CovariateMatrix::new(rows.len(), columns)
    }
}

/// Parse genotypes from a byte stream in the declared format.
pub fn load_genotypes<R: Read>(reader: R, format: GenotypeFormat) -> Result<GenotypeMatrix> {
    match format {
        GenotypeFormat::Tsv => load_tsv(reader),
        GenotypeFormat::PlinkRaw => load_plink_raw(reader).map(|(g, _)| g),
    }
}

fn parse_genotype_token(tok: &str, row: usize, col: usize, id: &str) -> Result<u8> {
    match tok {
        "0" => Ok(0),
        "1" => Ok(1),
        "2" => Ok(2),
        "NA" => Ok(MISSING),
        _ => Err(Error::Parse(format!(
            "invalid genotype token {:?} at row {}, column {} ({})",
            tok, row, col, id
        ))),
    }
}

fn load_tsv<R: Read>(reader: R) -> Result<GenotypeMatrix> {
    let mut lines = BufReader::new(reader).lines();
    let id_line = lines
        .next()
        .ok_or_else(|| Error::Parse("missing SNP id header line".into()))??;
    let loc_line = lines
        .next()
        .ok_or_else(|| Error::Parse("missing chrom:pos header line".into()))??;

    let ids: Vec<&str> = id_line.trim_end().split('\t').collect();
    let locs: Vec<&str> = loc_line.trim_end().split('\t').collect();
    if ids.is_empty() || ids[0].is_empty() {
        return Err(Error::Parse("empty SNP id header line".into()));
    }
    if locs.len() != ids.len() {
        return Err(Error::Parse(format!(
            "header mismatch: {} SNP ids but {} chrom:pos entries",
            ids.len(),
            locs.len()
        )));
    }
    let p = ids.len();
    let mut snps = Vec::with_capacity(p);
    for (j, (&id, &loc)) in ids.iter().zip(&locs).enumerate() {
        let (chrom, pos) = loc.split_once(':').ok_or_else(|| {
            Error::Parse(format!("malformed chrom:pos {:?} at column {}", loc, j))
        })?;
        let position: u64 = pos.parse().map_err(|_| {
            Error::Parse(format!("malformed position {:?} at column {}", pos, j))
        })?;
        snps.push(SnpMeta::new(id, chrom, position));
    }

    // Collect rows (row-major), then transpose into column-major storage.
    let mut rows: Vec<Vec<u8>> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.trim_end().split('\t').collect();
        if toks.len() != p {
            return Err(Error::Parse(format!(
                "row {} has {} tokens, expected {}",
                lineno, // 0-based individual index
                toks.len(),
                p
            )));
        }
        let row = toks
            .iter()
            .enumerate()
            .map(|(j, tok)| parse_genotype_token(tok, lineno, j, &snps[j].id))
            .collect::<Result<Vec<u8>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 {
        return Err(Error::Empty("no individual rows in genotype file".into()));
    }
    let mut values = vec![0u8; n * p];
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            values[j * n + i] = v;
        }
    }
    GenotypeMatrix::new(n, snps, values)
}

/// PLINK `.raw` ingestion. The file carries no genomic coordinates, so all
/// SNPs are placed on pseudo-chromosome "0" with position = column order + 1;
/// the file's column order defines genomic adjacency.
///
/// Returns the phenotype column translated from 1=control / 2=case when every
/// row carries one of those two codes, `None` otherwise.
pub fn load_plink_raw<R: Read>(reader: R) -> Result<(GenotypeMatrix, Option<Phenotype>)> {
    const FIXED: [&str; 6] = ["FID", "IID", "PAT", "MAT", "SEX", "PHENOTYPE"];
    let mut lines = BufReader::new(reader).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty .raw file".into()))??;
    let htoks: Vec<&str> = header.split_whitespace().collect();
    if htoks.len() < 7 || htoks[..6] != FIXED {
        return Err(Error::Parse(
            "malformed .raw header: expected FID IID PAT MAT SEX PHENOTYPE snp1 ...".into(),
        ));
    }
    let snps: Vec<SnpMeta> = htoks[6..]
        .iter()
        .enumerate()
        .map(|(j, &id)| SnpMeta::new(id, "0", (j + 1) as u64))
        .collect();
    let p = snps.len();

    let mut rows: Vec<Vec<u8>> = Vec::new();
    let mut pheno_raw: Vec<String> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 6 + p {
            return Err(Error::Parse(format!(
                "row {} has {} fields, expected {}",
                lineno,
                toks.len(),
                6 + p
            )));
        }
        pheno_raw.push(toks[5].to_string());
        let row = toks[6..]
            .iter()
            .enumerate()
            .map(|(j, tok)| parse_genotype_token(tok, lineno, j, &snps[j].id))
            .collect::<Result<Vec<u8>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 {
        return Err(Error::Empty("no individual rows in .raw file".into()));
    }
    let mut values = vec![0u8; n * p];
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            values[j * n + i] = v;
        }
    }
    let matrix = GenotypeMatrix::new(n, snps, values)?;
    let phenotype = if pheno_raw.iter().all(|t| t == "1" || t == "2") {
        Some(Phenotype::new(
            pheno_raw.iter().map(|t| u8::from(t == "2")).collect(),
        )?)
    } else {
        None
    };
    Ok((matrix, phenotype))
}

/// Modal genotype of a column, ignoring missing entries; ties break toward
/// the smaller genotype value. `None` when the column is fully missing.
fn column_mode(col: &[u8]) -> Option<u8> {
    let mut counts = [0usize; 3];
    for &v in col {
        if v != MISSING {
            counts[v as usize] += 1;
        }
    }
    if counts.iter().all(|&c| c == 0) {
        return None;
    }
    let mut best = 0u8;
    for g in 1..3u8 {
        if counts[g as usize] > counts[best as usize] {
            best = g;
        }
    }
    Some(best)
}

/// Sample variance (denominator n-1) of a column after virtually filling
/// missing entries with the modal value. `None` for fully-missing columns.
fn imputed_variance(col: &[u8]) -> Option<f64> {
    let mode = column_mode(col)?;
    let n = col.len();
    if n < 2 {
        return Some(0.0);
    }
    let filled = |v: u8| if v == MISSING { mode } else { v };
    let sum: f64 = col.iter().map(|&v| f64::from(filled(v))).sum();
    let mean = sum / n as f64;
    let ss: f64 = col
        .iter()
        .map(|&v| {
            let d = f64::from(filled(v)) - mean;
            d * d
        })
        .sum();
    Some(ss / (n - 1) as f64)
}

/// Drop every column whose post-imputation sample variance is zero (this
/// includes fully-missing columns). Returns the reduced matrix and the
/// dropped SNP ids in column order.
pub fn drop_monomorphic(g: &GenotypeMatrix) -> Result<(GenotypeMatrix, Vec<String>)> {
    let mut keep = Vec::new();
    let mut dropped = Vec::new();
    for j in 0..g.p() {
        match imputed_variance(g.column_raw(j)) {
            Some(v) if v > 0.0 => keep.push(j),
            _ => dropped.push(g.snp(j).id.clone()),
        }
    }
    if keep.is_empty() {
        return Err(Error::Empty(
            "all columns are monomorphic after imputation".into(),
        ));
    }
    Ok((g.select_columns(&keep)?, dropped))
}

/// Fill missing entries with each column's most frequent genotype.
/// Idempotent; errors on a fully-missing column.
pub fn impute_most_frequent(g: &GenotypeMatrix) -> Result<GenotypeMatrix> {
    let n = g.n();
    let mut values = Vec::with_capacity(n * g.p());
    for j in 0..g.p() {
        let col = g.column_raw(j);
        let mode = column_mode(col).ok_or_else(|| {
            Error::InvalidInput(format!(
                "column {} ({}) has no observed genotypes to impute from",
                j,
                g.snp(j).id
            ))
        })?;
        values.extend(col.iter().map(|&v| if v == MISSING { mode } else { v }));
    }
    GenotypeMatrix::new(n, g.snps().to_vec(), values)
}

/// Scores of the top-k principal components of the column-standardized
/// genotype matrix, ordered by decreasing explained variance. Each
/// component's sign is canonicalized so its largest-magnitude loading is
/// positive.
pub fn pca_covariates(g: &GenotypeMatrix, k: usize) -> Result<CovariateMatrix> {
    let (n, p) = (g.n(), g.p());
    if !g.is_complete() {
        return Err(Error::InvalidInput(
            "PCA requires a complete matrix; impute first".into(),
        ));
    }
    if k == 0 {
        return Ok(CovariateMatrix::empty(n));
    }
    let max_k = p.min(n.saturating_sub(1));
    if k > max_k {
        return Err(Error::InvalidInput(format!(
            "requested {} components but at most {} are available (n = {}, P = {})",
            k, max_k, n, p
        )));
    }

    // Column-standardize (unit sample variance).
    let std_cols = par::try_map_indices(p, |j| {
        let col = g.column_raw(j);
        let mean = col.iter().map(|&v| f64::from(v)).sum::<f64>() / n as f64;
        let mut out = Vec::with_capacity(n);
        let mut ss = 0.0;
        for &v in col {
            let d = f64::from(v) - mean;
            ss += d * d;
            out.push(d);
        }
        if ss == 0.0 {
            return Err(Error::ConstantColumn {
                index: j,
                id: g.snp(j).id.clone(),
            });
        }
        let sd = (ss / (n - 1) as f64).sqrt();
        for v in &mut out {
            *v /= sd;
        }
        Ok(out)
    })?;
    let x = DMatrix::from_fn(n, p, |i, j| std_cols[j][i]);

    // Eigendecompose on the cheaper side; both give scores with squared norm
    // equal to the singular value squared.
    let mut scores: Vec<Vec<f64>> = Vec::with_capacity(k);
    if p <= n {
        let cov = x.transpose() * &x / (n - 1) as f64;
        let eig = cov.symmetric_eigen();
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        for &idx in order.iter().take(k) {
            let v = eig.eigenvectors.column(idx);
            let mut s = vec![0.0; n];
            for (sj, row) in s.iter_mut().zip(x.row_iter()) {
                *sj = row.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
            }
            canonicalize_sign(&mut s, v.iter().copied().collect::<Vec<f64>>());
            scores.push(s);
        }
    } else {
        let gram = &x * x.transpose();
        let eig = gram.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        for &idx in order.iter().take(k) {
            let lambda = eig.eigenvalues[idx].max(0.0);
            let sigma = lambda.sqrt();
            let u = eig.eigenvectors.column(idx);
            let mut s: Vec<f64> = u.iter().map(|&ui| ui * sigma).collect();
            // Loadings v = X^T u / sigma; sigma > 0 scaling does not change signs.
            let loadings: Vec<f64> = (0..p)
                .map(|j| (0..n).map(|i| x[(i, j)] * u[i]).sum())
                .collect();
            canonicalize_sign(&mut s, loadings);
            scores.push(s);
        }
    }

    let columns = scores
        .into_iter()
        .enumerate()
        .map(|(c, s)| (format!("PC{}", c + 1), s))
        .collect();
    CovariateMatrix::new(n, columns)
}

/// Flip the score column if the largest-magnitude loading is negative
/// (first index wins on magnitude ties).
fn canonicalize_sign(scores: &mut [f64], loadings: Vec<f64>) {
    let mut best = 0;
    for (j, v) in loadings.iter().enumerate() {
        if v.abs() > loadings[best].abs() {
            best = j;
        }
    }
    if loadings[best] < 0.0 {
        for s in scores.iter_mut() {
            *s = -*s;
        }
    }
}
