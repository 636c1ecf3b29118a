//! `dupq`: ingest, train, transfer, evaluate, report.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::DATA_DIR_ENV;

#[derive(Debug, Parser)]
#[command(name = "dupq", version, about = "Duplicate question-pair detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load a raw corpus, filter and preprocess it, and write the pair cache.
    Ingest(IngestArgs),
    /// Train GBT or the Siamese network and report test AUC.
    Train(RunArgs),
    /// Sweep transfer configurations from a trained source network.
    Transfer(TransferArgs),
    /// Score a trained model on a dataset's test split.
    Evaluate(EvaluateArgs),
    /// Collect reports under a directory into the results grid.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SourceKind {
    Quora,
    Askubuntu,
    Englishse,
    Synthetic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Recipe {
    Overlap,
    Paraphrase,
}

#[derive(Debug, Args)]
struct IngestArgs {
    #[arg(long, value_enum)]
    source: SourceKind,
    /// Quora TSV, or Posts.xml then PostLinks.xml for a StackExchange dump.
    #[arg(long = "input", num_args = 1..)]
    inputs: Vec<PathBuf>,
    /// Cache name; defaults to the source name.
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sampled non-duplicates per duplicate for StackExchange dumps.
    #[arg(long, default_value_t = 1.0)]
    negative_ratio: f64,
    #[arg(long, value_enum, default_value = "overlap")]
    recipe: Recipe,
    /// Number of synthetic pairs.
    #[arg(long, default_value_t = 1000)]
    pairs: usize,
    /// Output directory; defaults to the data directory.
    #[arg(long, env = DATA_DIR_ENV)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Gbt,
    Snn,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AggregationArg {
    Expabs,
    Concat,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EncoderArg {
    Mean,
    Lstm,
}

/// Flags shared by every command that builds a run; each overrides the
/// matching field of `--config`.
#[derive(Debug, Args)]
struct RunArgs {
    /// TOML or JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Cache path or name under the data directory; several names train
    /// one combined model.
    #[arg(long, value_delimiter = ',')]
    dataset: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Pre-trained word vectors in text format.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    #[arg(long, value_enum)]
    aggregation: Option<AggregationArg>,
    #[arg(long, value_enum)]
    encoder: Option<EncoderArg>,
    /// SNN epochs.
    #[arg(long)]
    epochs: Option<usize>,
    /// GBT boosting rounds.
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long, env = DATA_DIR_ENV)]
    data_dir: Option<PathBuf>,
    /// Parent of the run-stamped output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SweepArg {
    Curated,
    Full,
}

#[derive(Debug, Args)]
struct TransferArgs {
    /// Output directory of an SNN `train` run.
    #[arg(long)]
    source_run: PathBuf,
    #[arg(long, value_enum, default_value = "curated")]
    sweep: SweepArg,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Output directory of a `train` run.
    #[arg(long)]
    run_dir: PathBuf,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Directory searched recursively for `reports.jsonl` files.
    dir: PathBuf,
    /// Also write the grid under a run-stamped directory here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(a) => commands::ingest(&a),
        Command::Train(a) => commands::train(&a),
        Command::Transfer(a) => commands::transfer(&a),
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::Report(a) => commands::report(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", message(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}

/// The error chain joined by `: `, skipping causes the previous message
/// already spells out.
fn message(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !out.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

/// 3 when the inputs are readable but disagree with each other, 2 for
/// every other input or configuration problem.
fn exit_code(e: &anyhow::Error) -> u8 {
    use dupq::Error::*;
    let consistency = e.chain().any(|c| {
        matches!(
            c.downcast_ref::<dupq::Error>(),
            Some(
                DuplicateCell { .. }
                    | VersionMismatch { .. }
                    | ShapeMismatch { .. }
                    | SingleClass { .. }
                    | EmptyDataset(_)
                    | NoDuplicateLinks
                    | TooFewPairs { .. }
            )
        )
    });
    if consistency {
        3
    } else {
        2
    }
}
