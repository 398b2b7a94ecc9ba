use std::collections::HashSet;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use e2dpca::dataset::{self, LabeledDataset, SplitPolicy, SplitSpec};
use e2dpca::experiment::{self, ExperimentResult, OutputFormat};
use e2dpca::model::{Method, Metric, ModelConfig};
use e2dpca::reshape::Direction;

/// Face recognition benchmarks for PCA, 2DPCA, and the column-stacked
/// family in between.
#[derive(Parser)]
#[command(name = "e2dpca", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train and evaluate one configuration
    Run(RunArgs),
    /// Evaluate the full grid of the given methods, directions, radii, and
    /// feature counts
    Sweep(SweepArgs),
}

#[derive(Args)]
struct CorpusArgs {
    /// Corpus root in ORL layout: s1/1.pgm, s1/2.pgm, ... (or flat
    /// s1_1.pgm); also read from the environment
    #[arg(long, env = "E2DPCA_DATA_DIR", value_name = "DIR")]
    data_dir: PathBuf,

    /// Training images per subject; the rest become probes
    #[arg(long, default_value_t = 5, value_name = "K")]
    train_per_subject: usize,

    /// How the per-subject train/test cut is chosen
    #[arg(long, value_enum, default_value_t = SplitPolicyArg::FirstK)]
    split_policy: SplitPolicyArg,

    /// Seed for the random split policy
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitPolicyArg {
    /// Images 1..k of every subject train
    FirstK,
    /// Seeded per-subject shuffle
    Random,
}

#[derive(Args)]
struct OutputArgs {
    /// Output format for the result rows
    #[arg(long, default_value = "json")]
    format: OutputFormat,

    /// Write results to this file instead of stdout
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    corpus: CorpusArgs,

    /// pca, 2dpca, or e2dpca
    #[arg(long)]
    method: Method,

    /// Stacking direction: row or column
    #[arg(long, default_value = "row")]
    direction: Direction,

    /// Stacking radius (meaningful for e2dpca; pca and 2dpca ignore it)
    #[arg(long, default_value_t = 1)]
    r: usize,

    /// Number of projection axes
    #[arg(long)]
    d: usize,

    /// Feature distance: column-sum-l2 or frobenius
    #[arg(long, default_value = "column-sum-l2")]
    metric: Metric,

    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    corpus: CorpusArgs,

    /// Methods to sweep, comma separated
    #[arg(long, value_delimiter = ',', default_value = "pca,2dpca,e2dpca")]
    method: Vec<Method>,

    /// Directions to sweep, comma separated
    #[arg(long, value_delimiter = ',', default_value = "row,column")]
    direction: Vec<Direction>,

    /// Stacking radii to sweep, comma separated (e2dpca only)
    #[arg(long, value_delimiter = ',', default_value = "1")]
    r: Vec<usize>,

    /// Feature counts to sweep, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    d: Vec<usize>,

    /// Feature distance: column-sum-l2 or frobenius
    #[arg(long, default_value = "column-sum-l2")]
    metric: Metric,

    #[command(flatten)]
    out: OutputArgs,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::Sweep(args) => run_sweep(args),
    }
}

fn load_corpus(args: &CorpusArgs) -> Result<(LabeledDataset, SplitSpec)> {
    let ds = dataset::load_orl(&args.data_dir)
        .with_context(|| format!("loading corpus from {}", args.data_dir.display()))?;
    let policy = match args.split_policy {
        SplitPolicyArg::FirstK => SplitPolicy::FirstK,
        SplitPolicyArg::Random => SplitPolicy::SeededRandom(args.seed),
    };
    let spec = SplitSpec { train_per_subject: args.train_per_subject, policy };
    Ok((ds, spec))
}

fn emit(results: &[ExperimentResult], out: &OutputArgs) -> Result<()> {
    let bytes = experiment::emit_results(results, out.format)?;
    match &out.output {
        Some(path) => fs::write(path, bytes)
            .with_context(|| format!("writing results to {}", path.display()))?,
        None => io::stdout().write_all(&bytes).context("writing results to stdout")?,
    }
    Ok(())
}

fn run(args: RunArgs) -> Result<()> {
    let (ds, spec) = load_corpus(&args.corpus)?;
    let cfg = ModelConfig::new(args.method, args.direction, args.r, args.d, args.metric)?;
    let result = experiment::run_experiment(&ds, &spec, &cfg)
        .with_context(|| format!("running {cfg}"))?;
    emit(&[result], &args.out)
}

/// Expands the per-axis lists into a configuration grid: methods outermost,
/// then directions, radii, and feature counts. PCA ignores direction and
/// radius and 2DPCA ignores radius, so their duplicates collapse.
fn build_grid(args: &SweepArgs) -> Result<Vec<ModelConfig>> {
    let mut seen = HashSet::new();
    let mut grid = Vec::new();
    for &method in &args.method {
        for &direction in &args.direction {
            for &r in &args.r {
                for &d in &args.d {
                    let cfg = ModelConfig::new(method, direction, r, d, args.metric)?;
                    if seen.insert(cfg) {
                        grid.push(cfg);
                    }
                }
            }
        }
    }
    Ok(grid)
}

fn run_sweep(args: SweepArgs) -> Result<()> {
    let (ds, spec) = load_corpus(&args.corpus)?;
    let grid = build_grid(&args)?;
    let results = experiment::sweep(&ds, &spec, &grid).context("running sweep")?;
    for best in experiment::best_per_method(&results) {
        eprintln!(
            "best {}: {:.1}% accuracy, {} coefficients ({} direction, r={}, d={})",
            best.method,
            100.0 * best.accuracy,
            best.feature_coefficients,
            best.direction,
            best.r,
            best.d,
        );
    }
    emit(&results, &args.out)
}
