//! Command-line entry point: generate datasets, inspect them, re-order
//! bodies, re-verify answers, and evaluate models.

mod commands;
mod config;
mod load;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use config::{read_manifest, ConfigFile, EvalManifest, GenerateManifest, PermuteManifest};
use mwp_harness::Regime;

#[derive(Parser)]
#[command(
    name = "mwp",
    about = "Generate and evaluate arithmetic word problems with controlled proof structure",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset for one problem family.
    Generate(GenerateArgs),
    /// Print counts, shape histograms, and answer ranges for a dataset.
    Stats(StatsArgs),
    /// Evaluate a model (or offline stub) on a dataset under one prompt regime.
    Eval(EvalArgs),
    /// Move one body sentence to the front of every problem.
    Permute(PermuteArgs),
    /// Re-run the independent oracle over every record.
    Verify(StatsArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// linear-depth | linear-width | nonlinear-depth | order-perturbed
    #[arg(long)]
    family: Option<String>,
    /// Proof depth (linear-depth, nonlinear-depth).
    #[arg(long)]
    depth: Option<usize>,
    /// Leaf count (linear-width).
    #[arg(long)]
    width: Option<usize>,
    /// Move-to-front distance (order-perturbed); 0 keeps canonical order.
    #[arg(long)]
    distance: Option<usize>,
    /// Number of problems.
    #[arg(long)]
    n: Option<usize>,
    /// Dataset seed; per-problem seeds are derived from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Output JSONL path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory of vocabulary files (one token per line).
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Directory of template files.
    #[arg(long)]
    templates: Option<PathBuf>,
    /// key = value config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Rerun a previous generation exactly.
    #[arg(long, conflicts_with = "config")]
    from_manifest: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    dataset: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// zero-shot | primitive | range | in-distribution
    #[arg(long)]
    regime: Option<String>,
    /// stub:gold | stub:const:<text> | stub:script:<file> | http:<model>
    #[arg(long)]
    model: Option<String>,
    /// In-context examples per prompt (default: 12, or 5 for nonlinear, 0 for zero-shot).
    #[arg(long)]
    shots: Option<usize>,
    /// Endpoint base URL for http models.
    #[arg(long)]
    base_url: Option<String>,
    /// Completion token budget.
    #[arg(long)]
    max_tokens: Option<usize>,
    #[arg(long)]
    temperature: Option<f64>,
    /// Maximum in-flight requests.
    #[arg(long)]
    concurrency: Option<usize>,
    /// Attempts per problem on transport failures.
    #[arg(long)]
    retries: Option<usize>,
    /// Bootstrap resamples for the confidence interval.
    #[arg(long)]
    resamples: Option<usize>,
    /// Seed for example generation and the bootstrap.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_metrics: Option<PathBuf>,
    #[arg(long)]
    out_records: Option<PathBuf>,
    #[arg(long)]
    vocab: Option<PathBuf>,
    #[arg(long)]
    templates: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, conflicts_with = "config")]
    from_manifest: Option<PathBuf>,
}

#[derive(Args)]
struct PermuteArgs {
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Canonical index of the sentence to move first.
    #[arg(long)]
    distance: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, conflicts_with_all = ["dataset", "distance", "out"])]
    from_manifest: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate(args) => {
            let manifest = resolve_generate(args)?;
            commands::generate::run(&manifest)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Stats(args) => {
            commands::stats::run(&args.dataset)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval(args) => {
            let manifest = resolve_eval(args)?;
            commands::eval::run(&manifest)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Permute(args) => {
            let manifest = resolve_permute(args)?;
            commands::permute::run(&manifest)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify(args) => {
            let failures = commands::verify::run(&args.dataset)?;
            Ok(if failures == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}

fn resolve_generate(args: GenerateArgs) -> Result<GenerateManifest> {
    if let Some(path) = &args.from_manifest {
        return read_manifest(path);
    }
    let cfg = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    Ok(GenerateManifest {
        family: args
            .family
            .or_else(|| cfg.string("family"))
            .context("--family is required")?,
        depth: args.depth.or_else(|| cfg.usize("depth")),
        width: args.width.or_else(|| cfg.usize("width")),
        distance: args.distance.or_else(|| cfg.usize("distance")),
        n: args.n.or_else(|| cfg.usize("n")).unwrap_or(400),
        seed: args.seed.or_else(|| cfg.u64("seed")).unwrap_or(0),
        out: args
            .out
            .or_else(|| cfg.path("out"))
            .context("--out is required")?,
        vocab: args.vocab.or_else(|| cfg.path("vocab")),
        templates: args.templates.or_else(|| cfg.path("templates")),
    })
}

fn resolve_eval(args: EvalArgs) -> Result<EvalManifest> {
    if let Some(path) = &args.from_manifest {
        return read_manifest(path);
    }
    let cfg = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let dataset = args
        .dataset
        .or_else(|| cfg.path("dataset"))
        .context("--dataset is required")?;
    let regime_name = args
        .regime
        .or_else(|| cfg.string("regime"))
        .context("--regime is required")?;
    let regime =
        Regime::parse(&regime_name).with_context(|| format!("unknown regime {regime_name}"))?;
    let shots = match args.shots.or_else(|| cfg.usize("shots")) {
        Some(shots) => shots,
        None => {
            // default depends on the dataset family; peek at the first record
            let records = mwp_core::dataset::read_jsonl(&dataset)?;
            let family = records
                .first()
                .map(|r| r.family.clone())
                .unwrap_or_default();
            commands::eval::default_shots_for(regime, &family)
        }
    };
    Ok(EvalManifest {
        dataset,
        regime: regime_name,
        shots,
        model: args
            .model
            .or_else(|| cfg.string("model"))
            .context("--model is required")?,
        base_url: args.base_url.or_else(|| cfg.string("base-url")),
        max_tokens: args
            .max_tokens
            .or_else(|| cfg.usize("max-tokens"))
            .unwrap_or(4096),
        temperature: args
            .temperature
            .or_else(|| cfg.f64("temperature"))
            .unwrap_or(0.0),
        concurrency: args
            .concurrency
            .or_else(|| cfg.usize("concurrency"))
            .unwrap_or(4),
        retries: args.retries.or_else(|| cfg.usize("retries")).unwrap_or(3),
        resamples: args
            .resamples
            .or_else(|| cfg.usize("resamples"))
            .unwrap_or(10_000),
        seed: args.seed.or_else(|| cfg.u64("seed")).unwrap_or(0),
        out_metrics: args
            .out_metrics
            .or_else(|| cfg.path("out-metrics"))
            .unwrap_or_else(|| PathBuf::from("metrics.json")),
        out_records: args
            .out_records
            .or_else(|| cfg.path("out-records"))
            .unwrap_or_else(|| PathBuf::from("eval_records.jsonl")),
        vocab: args.vocab.or_else(|| cfg.path("vocab")),
        templates: args.templates.or_else(|| cfg.path("templates")),
    })
}

fn resolve_permute(args: PermuteArgs) -> Result<PermuteManifest> {
    if let Some(path) = &args.from_manifest {
        return read_manifest(path);
    }
    Ok(PermuteManifest {
        dataset: args.dataset.context("--dataset is required")?,
        distance: args.distance.context("--distance is required")?,
        out: args.out.context("--out is required")?,
    })
}
