//! Command-line surface: `simulate`, `cluster`, `cutlevel`, `assoc`,
//! `evaluate`. All tabular outputs are tab-separated with a single header
//! line; every command writes a JSON run manifest next to its outputs.

mod manifest;

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use blockgwas::assoc::{self, AssociationResult, MultipleTesting};
use blockgwas::cutlevel::{self, CutLevelConfig};
use blockgwas::evaluate::{self, EvalMethod, EvalUnit};
use blockgwas::genotype::{
    drop_monomorphic, impute_most_frequent, load_genotypes, load_plink_raw, pca_covariates,
    CovariateMatrix, GenotypeFormat, GenotypeMatrix, Phenotype, DEFAULT_NUM_PCS,
};
use blockgwas::hac;
use blockgwas::ld;
use blockgwas::simulate::{self, SimConfig};

use manifest::RunManifest;

#[derive(Parser)]
#[command(
    name = "blockgwas",
    version,
    about = "Block-wise GWAS: LD-constrained clustering, aggregated-SNP association, simulation"
)]
struct Cli {
    /// Random seed (overrides any seed in --config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Cap the number of worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for all outputs.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// JSON config; command-line flags win over config values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a genotype/phenotype bundle with ground truth.
    Simulate(SimulateArgs),
    /// Build the LD-constrained Ward dendrogram for a genotype file.
    Cluster(ClusterArgs),
    /// Pick the cluster count by held-out ridge-logistic AUC.
    Cutlevel(CutlevelArgs),
    /// Run association tests (per-SNP or per-aggregated-SNP) with BH FDR.
    Assoc(AssocArgs),
    /// Score association results against simulation ground truth.
    Evaluate(EvaluateArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Individuals (overrides config).
    #[arg(long)]
    n: Option<usize>,
    /// SNPs (overrides config).
    #[arg(long)]
    p: Option<usize>,
    /// singleSNP or clusSNP (overrides config).
    #[arg(long)]
    scenario: Option<String>,
    /// Causal unit count (overrides config).
    #[arg(long)]
    ell: Option<usize>,
    /// Retained SNP fraction (overrides config).
    #[arg(long)]
    chip_fraction: Option<f64>,
    /// Phenotype replicate count (overrides config).
    #[arg(long)]
    replicates: Option<usize>,
}

#[derive(Args)]
struct ClusterArgs {
    #[arg(long)]
    genotypes: PathBuf,
    /// tsv or plink-raw; inferred from the extension when omitted.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    bandwidth: Option<usize>,
    /// Also dump the banded dissimilarity as ld_band.tsv.
    #[arg(long)]
    dump_band: bool,
}

#[derive(Args)]
struct CutlevelArgs {
    #[arg(long)]
    genotypes: PathBuf,
    #[arg(long)]
    format: Option<String>,
    /// Phenotype file; optional when a .raw file carries 1/2 codes.
    #[arg(long)]
    phenotype: Option<PathBuf>,
    /// Principal components used as covariates.
    #[arg(long)]
    pcs: Option<usize>,
    /// Comma-separated cluster counts, e.g. 50,100,500.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    split_fraction: Option<f64>,
    #[arg(long)]
    bandwidth: Option<usize>,
}

#[derive(Args)]
struct AssocArgs {
    #[arg(long)]
    genotypes: PathBuf,
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    phenotype: Option<PathBuf>,
    /// sma (per SNP) or sasa (per aggregated-SNP).
    #[arg(long)]
    mode: String,
    /// FDR level.
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    pcs: Option<usize>,
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    split_fraction: Option<f64>,
    #[arg(long)]
    bandwidth: Option<usize>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Results TSV from `assoc`.
    #[arg(long)]
    results: PathBuf,
    /// ground_truth.json from `simulate`.
    #[arg(long)]
    truth: PathBuf,
    /// sma or sasa.
    #[arg(long)]
    method: String,
    /// snp or cluster.
    #[arg(long)]
    unit: String,
    /// FDR level the results were produced at (recorded in the scores).
    #[arg(long)]
    phi: Option<f64>,
}

/// Analysis defaults that a config file may override.
#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
struct AnalysisConfig {
    bandwidth: usize,
    grid: Option<Vec<usize>>,
    split_fraction: f64,
    phi: f64,
    pcs: usize,
    cv_folds: usize,
    lambda_grid: Vec<f64>,
    seed: u64,
    threads: Option<usize>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            bandwidth: ld::DEFAULT_BANDWIDTH,
            grid: None,
            split_fraction: 2.0 / 3.0,
            phi: 0.05,
            pcs: DEFAULT_NUM_PCS,
            cv_folds: 5,
            lambda_grid: cutlevel::default_lambda_grid(),
            seed: 0,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default)]
struct AppConfig {
    sim: Option<SimConfig>,
    analysis: AnalysisConfig,
}

fn load_config(path: Option<&PathBuf>) -> Result<AppConfig> {
    match path {
        None => Ok(AppConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("cannot read config {}", p.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("cannot parse config {}", p.display()))
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {:#}", e);
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    fs::create_dir_all(&cli.out_dir)
        .with_context(|| format!("cannot create out dir {}", cli.out_dir.display()))?;
    let config = load_config(cli.config.as_ref())?;
    if let Some(t) = cli.threads.or(config.analysis.threads) {
        blockgwas::set_threads(t);
    }
    match &cli.command {
        Command::Simulate(args) => cmd_simulate(&cli, &config, args),
        Command::Cluster(args) => cmd_cluster(&cli, &config, args),
        Command::Cutlevel(args) => cmd_cutlevel(&cli, &config, args),
        Command::Assoc(args) => cmd_assoc(&cli, &config, args),
        Command::Evaluate(args) => cmd_evaluate(&cli, &config, args),
    }
}

fn parse_format(arg: Option<&String>, path: &Path) -> Result<GenotypeFormat> {
    match arg.map(String::as_str) {
        Some("tsv") => Ok(GenotypeFormat::Tsv),
        Some("plink-raw") | Some("raw") => Ok(GenotypeFormat::PlinkRaw),
        Some(other) => bail!("unknown genotype format {:?}", other),
        None => Ok(
            if path.extension().is_some_and(|e| e == "raw") {
                GenotypeFormat::PlinkRaw
            } else {
                GenotypeFormat::Tsv
            },
        ),
    }
}

fn parse_grid(arg: Option<&String>) -> Result<Option<Vec<usize>>> {
    match arg {
        None => Ok(None),
        Some(s) => {
            let levels = s
                .split(',')
                .map(|t| t.trim().parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .with_context(|| format!("cannot parse grid {:?}", s))?;
            Ok(Some(levels))
        }
    }
}

/// Load, QC (drop monomorphic, impute), and return the analyzed matrix plus
/// any phenotype embedded in a .raw file.
fn load_analyzed(
    path: &Path,
    format: GenotypeFormat,
) -> Result<(GenotypeMatrix, Option<Phenotype>, Vec<String>)> {
    let file = fs::File::open(path)
        .with_context(|| format!("cannot open genotypes {}", path.display()))?;
    let reader = std::io::BufReader::new(file);
    let (raw, embedded) = match format {
        GenotypeFormat::Tsv => (load_genotypes(reader, GenotypeFormat::Tsv)?, None),
        GenotypeFormat::PlinkRaw => {
            let (g, y) = load_plink_raw(reader)?;
            (g, y)
        }
    };
    let (kept, dropped) = drop_monomorphic(&raw)?;
    let complete = impute_most_frequent(&kept)?;
    Ok((complete, embedded, dropped))
}

fn load_phenotype(arg: Option<&PathBuf>, embedded: Option<Phenotype>) -> Result<Phenotype> {
    match (arg, embedded) {
        (Some(p), _) => {
            let file = fs::File::open(p)
                .with_context(|| format!("cannot open phenotype {}", p.display()))?;
            Ok(Phenotype::load(std::io::BufReader::new(file))?)
        }
        (None, Some(y)) => Ok(y),
        (None, None) => bail!("no phenotype: pass --phenotype or use a .raw file with 1/2 codes"),
    }
}

fn covariates_for(g: &GenotypeMatrix, pcs: usize) -> Result<CovariateMatrix> {
    if pcs == 0 {
        Ok(CovariateMatrix::empty(g.n()))
    } else {
        Ok(pca_covariates(g, pcs)?)
    }
}

fn write_with<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<fs::File>) -> blockgwas::Result<()>,
{
    let mut w = BufWriter::new(
        fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
    );
    f(&mut w).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn cmd_simulate(cli: &Cli, config: &AppConfig, args: &SimulateArgs) -> Result<()> {
    let mut sim = config
        .sim
        .clone()
        .unwrap_or_else(|| SimConfig {
            n: 500,
            p: 2000,
            scenario: simulate::Scenario::ClusSnp,
            seed: 0,
            ..default_sim()
        });
    if let Some(n) = args.n {
        sim.n = n;
    }
    if let Some(p) = args.p {
        sim.p = p;
    }
    if let Some(s) = &args.scenario {
        sim.scenario = simulate::Scenario::from_str(s)?;
    }
    if let Some(ell) = args.ell {
        sim.ell = ell;
    }
    if let Some(f) = args.chip_fraction {
        sim.chip_fraction = f;
    }
    if let Some(r) = args.replicates {
        sim.phenotype_replicates = r;
    }
    if let Some(seed) = cli.seed {
        sim.seed = seed;
    }

    let bundle = simulate::simulate_bundle(&sim)?;
    let paths = simulate::write_bundle(&cli.out_dir, &bundle)?;

    let mut m = RunManifest::new("simulate", Some(sim.seed), serde_json::to_value(&sim)?);
    if let Some(cfg_path) = &cli.config {
        m.add_input(cfg_path)?;
    }
    for p in &paths {
        m.add_output(p);
    }
    m.write(&cli.out_dir)?;
    eprintln!(
        "simulated {} x {} ({} analyzed after masking), beta = {}, {} phenotype replicate(s)",
        sim.n,
        sim.p,
        bundle.genotypes.p(),
        bundle.truth.beta,
        bundle.phenotypes.len()
    );
    Ok(())
}

fn default_sim() -> SimConfig {
    serde_json::from_str(r#"{"n": 500, "p": 2000, "scenario": "clusSNP", "seed": 0}"#)
        .expect("default sim config")
}

fn cmd_cluster(cli: &Cli, config: &AppConfig, args: &ClusterArgs) -> Result<()> {
    let format = parse_format(args.format.as_ref(), &args.genotypes)?;
    let (g, _, dropped) = load_analyzed(&args.genotypes, format)?;
    let bandwidth = args
        .bandwidth
        .unwrap_or(config.analysis.bandwidth)
        .min(g.p().saturating_sub(1))
        .max(1);
    let band = ld::ld_band(&g, bandwidth)?;
    let dendrogram = hac::build(&band, &g.chromosome_barriers())?;

    let dpath = cli.out_dir.join("dendrogram.tsv");
    write_with(&dpath, |w| dendrogram.write_tsv(w))?;

    let mut m = RunManifest::new(
        "cluster",
        cli.seed,
        serde_json::json!({
            "bandwidth": bandwidth,
            "dropped_monomorphic": dropped,
            "p_analyzed": g.p(),
            "chromosomes": g.n_chromosomes(),
        }),
    );
    m.add_input(&args.genotypes)?;
    m.add_output(&dpath);
    if args.dump_band {
        let bpath = cli.out_dir.join("ld_band.tsv");
        write_with(&bpath, |w| band.write_tsv(w))?;
        m.add_output(&bpath);
    }
    m.write(&cli.out_dir)?;
    eprintln!(
        "clustered {} SNPs into {} tree(s), {} merges",
        g.p(),
        dendrogram.n_trees(),
        dendrogram.merges().len()
    );
    Ok(())
}

fn cutlevel_config(
    cli: &Cli,
    config: &AppConfig,
    grid: Option<&String>,
    split_fraction: Option<f64>,
    bandwidth: Option<usize>,
) -> Result<CutLevelConfig> {
    Ok(CutLevelConfig {
        grid: parse_grid(grid)?.or_else(|| config.analysis.grid.clone()),
        split_fraction: split_fraction.unwrap_or(config.analysis.split_fraction),
        seed: cli.seed.unwrap_or(config.analysis.seed),
        bandwidth: bandwidth.unwrap_or(config.analysis.bandwidth),
        lambda_grid: config.analysis.lambda_grid.clone(),
        cv_folds: config.analysis.cv_folds,
    })
}

fn cmd_cutlevel(cli: &Cli, config: &AppConfig, args: &CutlevelArgs) -> Result<()> {
    let format = parse_format(args.format.as_ref(), &args.genotypes)?;
    let (g, embedded, _) = load_analyzed(&args.genotypes, format)?;
    let y = load_phenotype(args.phenotype.as_ref(), embedded)?;
    let pcs = args.pcs.unwrap_or(config.analysis.pcs);
    let cov = covariates_for(&g, pcs)?;
    let cfg = cutlevel_config(
        cli,
        config,
        args.grid.as_ref(),
        args.split_fraction,
        args.bandwidth,
    )?;

    let (result, _d_best) = cutlevel::select_cut_level(&g, &y, &cov, &cfg)?;

    let apath = cli.out_dir.join("auc_curve.tsv");
    write_with(&apath, |w| result.write_auc_tsv(w))?;

    let mut m = RunManifest::new(
        "cutlevel",
        Some(cfg.seed),
        serde_json::json!({
            "best_level": result.best_level,
            "pcs": pcs,
            "bandwidth": cfg.bandwidth,
            "split_fraction": cfg.split_fraction,
            "train_size": result.train.len(),
            "test_size": result.test.len(),
            "lambda_per_level": result.lambda_per_level,
            "candidates": result.candidates,
        }),
    );
    m.add_input(&args.genotypes)?;
    if let Some(p) = &args.phenotype {
        m.add_input(p)?;
    }
    m.add_output(&apath);
    m.write(&cli.out_dir)?;
    eprintln!(
        "best cut level: {} clusters (max AUC {:.4})",
        result.best_level,
        result
            .candidates
            .iter()
            .map(|&(_, a)| a)
            .fold(f64::NEG_INFINITY, f64::max)
    );
    Ok(())
}

fn cmd_assoc(cli: &Cli, config: &AppConfig, args: &AssocArgs) -> Result<()> {
    let format = parse_format(args.format.as_ref(), &args.genotypes)?;
    let (g, embedded, _) = load_analyzed(&args.genotypes, format)?;
    let y = load_phenotype(args.phenotype.as_ref(), embedded)?;
    let pcs = args.pcs.unwrap_or(config.analysis.pcs);
    let cov = covariates_for(&g, pcs)?;
    let phi = args.phi.unwrap_or(config.analysis.phi);

    let mut params = serde_json::json!({
        "mode": args.mode,
        "phi": phi,
        "pcs": pcs,
    });
    let mut extra_outputs: Vec<PathBuf> = Vec::new();

    let result: AssociationResult = match args.mode.as_str() {
        "sma" => assoc::run_sma(&g, &y, &cov, phi)?,
        "sasa" => {
            let cfg = cutlevel_config(
                cli,
                config,
                args.grid.as_ref(),
                args.split_fraction,
                args.bandwidth,
            )?;
            let (cut_result, d_best) = cutlevel::select_cut_level(&g, &y, &cov, &cfg)?;
            let apath = cli.out_dir.join("assoc_auc_curve.tsv");
            write_with(&apath, |w| cut_result.write_auc_tsv(w))?;
            extra_outputs.push(apath);
            params["best_level"] = serde_json::json!(cut_result.best_level);
            params["seed"] = serde_json::json!(cfg.seed);
            params["lambda_per_level"] = serde_json::json!(cut_result.lambda_per_level);
            assoc::run_sasa(&d_best, g.snps(), &y, &cov, phi)?
        }
        other => bail!("unknown mode {:?} (expected sma or sasa)", other),
    };

    let rpath = cli.out_dir.join("results.tsv");
    write_with(&rpath, |w| result.write_tsv(w))?;
    let spath = cli.out_dir.join("summary.json");
    fs::write(
        &spath,
        serde_json::to_string_pretty(&result.summary_json())? + "\n",
    )?;

    let mut m = RunManifest::new("assoc", cli.seed.or(Some(config.analysis.seed)), params);
    m.add_input(&args.genotypes)?;
    if let Some(p) = &args.phenotype {
        m.add_input(p)?;
    }
    m.add_output(&rpath);
    m.add_output(&spath);
    for p in &extra_outputs {
        m.add_output(p);
    }
    m.write(&cli.out_dir)?;
    eprintln!(
        "{}: {} significant of {} tested (threshold {:.3e})",
        args.mode,
        result.n_significant(),
        result.records.len(),
        result.threshold
    );
    Ok(())
}

fn cmd_evaluate(cli: &Cli, config: &AppConfig, args: &EvaluateArgs) -> Result<()> {
    let method = EvalMethod::from_str(&args.method)?;
    let unit = EvalUnit::from_str(&args.unit)?;
    let phi = args.phi.unwrap_or(config.analysis.phi);

    let rfile = fs::File::open(&args.results)
        .with_context(|| format!("cannot open results {}", args.results.display()))?;
    let results = AssociationResult::read_tsv(
        std::io::BufReader::new(rfile),
        MultipleTesting::BenjaminiHochberg,
        phi,
    )?;
    let truth = simulate::read_ground_truth(&args.truth)?;

    let counts = evaluate::match_results(&results, &truth, method, unit)?;
    let ell = truth.causal_snps.len().max(truth.causal_spans.len());
    let row = evaluate::average_counts(truth.scenario, ell, method, unit, &[counts]);

    let spath = cli.out_dir.join("scores.tsv");
    write_with(&spath, |w| evaluate::write_scores_tsv(&[row], w))?;

    let mut m = RunManifest::new(
        "evaluate",
        cli.seed,
        serde_json::json!({
            "method": method.as_str(),
            "unit": unit.as_str(),
            "phi": phi,
            "tp": counts.tp,
            "fp": counts.fp,
            "tn": counts.tn,
            "fn": counts.fn_count,
        }),
    );
    m.add_input(&args.results)?;
    m.add_input(&args.truth)?;
    m.add_output(&spath);
    m.write(&cli.out_dir)?;
    eprintln!(
        "{}/{}: tp={} fp={} tn={} fn={}",
        method.as_str(),
        unit.as_str(),
        counts.tp,
        counts.fp,
        counts.tn,
        counts.fn_count
    );
    Ok(())
}
