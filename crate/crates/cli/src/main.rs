//! `pqcd`: corpus generation, training, sampling and evaluation from the command line.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error.

mod commands;
mod records;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pqcd_core::dataset::TaskKind;
use pqcd_core::metrics::Format;
use pqcd_core::GateSetId;

#[derive(Debug, Parser)]
#[command(name = "pqcd", version, about = "Conditional diffusion synthesis of parameterized quantum circuits")]
pub struct Cli {
    /// Worker thread cap (falls back to PQCD_THREADS, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Corpus operations.
    Dataset {
        #[command(subcommand)]
        action: DatasetCommand,
    },
    /// Train a denoiser on a corpus.
    Train(TrainArgs),
    /// Sample circuits from a checkpoint.
    Sample(SampleArgs),
    /// Score sampled circuits or tensors.
    Evaluate(EvaluateArgs),
    /// Render evaluation reports as CSV, Markdown or JSON.
    Report(ReportArgs),
}

#[derive(Debug, Subcommand)]
pub enum DatasetCommand {
    /// Build a balanced, labeled corpus.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value = "ghz")]
    pub task: TaskKind,
    #[arg(long, default_value = "gs1")]
    pub gateset: GateSetId,
    #[arg(long, default_value_t = 3)]
    pub qubits: usize,
    /// Overrides the balance spec's gate range (bins are re-split evenly).
    #[arg(long)]
    pub min_gates: Option<usize>,
    #[arg(long)]
    pub max_gates: Option<usize>,
    /// Drop candidates deeper than this many slots.
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    /// JSON balance spec replacing the gate set's default.
    #[arg(long)]
    pub balance: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// JSON training config; missing fields take defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Per-step loss log (JSONL); defaults to `<out>.metrics.jsonl`.
    #[arg(long)]
    pub metrics: Option<PathBuf>,
    /// Print a loss line to stderr every this many steps.
    #[arg(long, default_value_t = 50)]
    pub log_every: usize,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub ckpt: PathBuf,
    #[arg(long, default_value = "ghz")]
    pub task: TaskKind,
    #[arg(long, default_value_t = 1.0)]
    pub target: f64,
    #[arg(long, default_value_t = 10.0)]
    pub guidance: f64,
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    /// Defaults to the training qubit count; other values run zero-shot.
    #[arg(long)]
    pub qubits: Option<usize>,
    /// Slots per circuit; defaults to the training value.
    #[arg(long)]
    pub max_gates: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Raw tensor dump.
    #[arg(long)]
    pub out: PathBuf,
    /// Decoded circuits (JSONL, one record per sample, errors included).
    #[arg(long)]
    pub circuits: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// `circuits.jsonl` from `sample`, or a raw tensor dump (needs --ckpt).
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value = "ghz")]
    pub task: TaskKind,
    /// Minimum value counted as reaching the target (default 0.99 for ghz).
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Prompted accuracy for `ml`; samples within --tolerance count.
    #[arg(long)]
    pub target: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    pub tolerance: f64,
    /// Checkpoint providing the embedding table when --in is a tensor dump.
    #[arg(long)]
    pub ckpt: Option<PathBuf>,
    #[arg(long)]
    pub report: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// One or more evaluation reports; each becomes a row.
    #[arg(long = "in", required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, default_value = "csv")]
    pub format: Format,
    /// Write here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Runtime(e.into())
    }
}

fn configure_threads(flag: Option<usize>) -> Result<(), Failure> {
    let threads = match flag {
        Some(n) => Some(n),
        None => match std::env::var("PQCD_THREADS") {
            Ok(v) if !v.trim().is_empty() => Some(
                v.trim()
                    .parse()
                    .map_err(|_| Failure::Usage(format!("PQCD_THREADS must be a positive integer, got '{v}'")))?,
            ),
            _ => None,
        },
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads(cli.threads).and_then(|()| match &cli.command {
        Command::Dataset {
            action: DatasetCommand::Generate(a),
        } => commands::generate(a),
        Command::Train(a) => commands::train(a),
        Command::Sample(a) => commands::sample(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Report(a) => commands::report(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
