//! Batch driver for entropy jobs: parse a JSON job config, run the
//! requested pipeline, and emit machine-readable convergence tables.
//!
//! The same config format feeds every subcommand. Reported JSON is
//! byte-identical across reruns of the same job; wall-clock times appear
//! only in the CSV table and in the stdout summary.

pub mod config;
pub mod jobs;

use std::path::PathBuf;

use anyhow::Context;
use clap::{Parser, Subcommand};

use config::{JobConfig, OutputFormat};
use jobs::RunOutcome;

#[derive(Parser, Debug)]
#[command(
    name = "algact",
    about = "Entropy of principal algebraic actions via finite-quotient determinants"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Parser)]
pub struct CommonArgs {
    /// Path to the JSON job config.
    #[arg(long)]
    pub config: PathBuf,
    /// Output path for the report (defaults to the config's output.path,
    /// else stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report format; only the entropy pipeline honors csv.
    #[arg(long, value_parser = parse_format)]
    pub format: Option<OutputFormat>,
    /// Size of the rayon thread pool.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Reserved for randomized property-test helpers; never affects
    /// reported values.
    #[arg(long)]
    pub seed: Option<u64>,
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    match s {
        "json" => Ok(OutputFormat::Json),
        "csv" => Ok(OutputFormat::Csv),
        other => Err(format!("unknown format `{other}` (expected json or csv)")),
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Certify invertibility, then per-level entropy by the requested
    /// methods, with the spectral bracket and the convergence diagnostics.
    Entropy(CommonArgs),
    /// Exact |Fix_{Gamma_n}(X_f)| along the configured moduli.
    Fixcount(CommonArgs),
    /// Invertibility certificate only (expansive / nonexpansive / unknown).
    Invert(CommonArgs),
    /// Wiener check and logarithmic Mahler measure on the torus (Z^d only).
    Mahler(CommonArgs),
    /// Specification gluing of the homoclinic point against zero.
    Specdemo(CommonArgs),
    /// Shell-decay profile of the truncated inverse.
    Decay(CommonArgs),
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Entropy(c)
            | Command::Fixcount(c)
            | Command::Invert(c)
            | Command::Mahler(c)
            | Command::Specdemo(c)
            | Command::Decay(c) => c,
        }
    }
}

fn load_config(args: &CommonArgs) -> anyhow::Result<JobConfig> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("cannot read config {}", args.config.display()))?;
    JobConfig::from_json(&text)
}

fn write_outcome(args: &CommonArgs, cfg: &JobConfig, outcome: &RunOutcome) -> anyhow::Result<()> {
    let cfg_out = cfg.output.as_ref();
    let format = args
        .format
        .or_else(|| cfg_out.and_then(|o| o.format))
        .unwrap_or(OutputFormat::Json);
    let path = args
        .out
        .clone()
        .or_else(|| cfg_out.and_then(|o| o.path.as_ref().map(PathBuf::from)));
    let body = match (format, &outcome.csv) {
        (OutputFormat::Csv, Some(csv)) => csv.clone(),
        (OutputFormat::Csv, None) => outcome.json.clone(),
        (OutputFormat::Json, _) => outcome.json.clone(),
    };
    match path {
        Some(p) => std::fs::write(&p, body)
            .with_context(|| format!("cannot write report to {}", p.display()))?,
        None => println!("{body}"),
    }
    Ok(())
}

/// Runs one parsed invocation; the returned integer is the process exit
/// status (0 success, 2 nonexpansive, 3 unknown-invertibility advisory).
pub fn run(cli: Cli) -> anyhow::Result<i32> {
    let common = cli.command.common().clone();
    if let Some(n) = common.threads {
        // Only the first initialization wins; later calls are harmless.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let cfg = load_config(&common)?;
    let outcome = match &cli.command {
        Command::Entropy(_) => jobs::run_entropy(&cfg)?,
        Command::Fixcount(_) => jobs::run_fixcount(&cfg)?,
        Command::Invert(_) => jobs::run_invert(&cfg)?,
        Command::Mahler(_) => jobs::run_mahler(&cfg)?,
        Command::Specdemo(_) => jobs::run_specdemo(&cfg)?,
        Command::Decay(_) => jobs::run_decay(&cfg)?,
    };
    eprintln!("{}", outcome.summary);
    write_outcome(&common, &cfg, &outcome)?;
    Ok(outcome.exit)
}
