//! `kexpand`: benchmark, feature dumps, kernel checks, training and evaluation.

mod commands;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use error::CliError;

pub const DEFAULT_SEED: u64 = 1398239763;

#[derive(Debug, Parser)]
#[command(name = "kexpand", version, about = "Hash-seeded Fastfood kernel expansions")]
struct Cli {
    /// Cap on worker threads (default: one per core).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Time the fast Walsh-Hadamard transform against the naive product.
    BenchWht(BenchArgs),
    /// Dump feature vectors of an IDX image file.
    Features(FeaturesArgs),
    /// Compare feature inner products with the exact RBF kernel.
    KernelCheck(KernelCheckArgs),
    /// Train a softmax head with mini-batch SGD.
    Train(TrainArgs),
    /// Score a saved checkpoint on a test set.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelArg {
    Rbf,
    Matern,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleArg {
    Unit,
    Normalized,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BenchArgs {
    /// Sizes as `lo..hi` (doubling) or a comma list.
    #[arg(long, default_value = "1024..1048576")]
    pub sizes: String,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    /// Largest size timed with the naive product.
    #[arg(long, default_value_t = kexpand::wht::DEFAULT_NAIVE_CUTOFF)]
    pub naive_cutoff: usize,
    /// CSV path (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct KernelArgs {
    #[arg(long, value_enum, default_value_t = KernelArg::Matern)]
    pub kernel: KernelArg,
    /// Kernel width.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Matern unit-ball sample count.
    #[arg(long, default_value_t = 40)]
    pub t: usize,
    /// Number of stacked blocks.
    #[arg(long, default_value_t = 1)]
    pub expansions: usize,
    #[arg(long, env = "MCK_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Train on plain cos/sin (`unit`) or divided by sqrt(D) (`normalized`).
    #[arg(long, value_enum, default_value_t = ScaleArg::Unit)]
    pub feature_scale: ScaleArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FeaturesArgs {
    #[arg(long)]
    pub images: PathBuf,
    /// With labels the dump also carries label and class-count records.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub subset: Option<usize>,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct KernelCheckArgs {
    #[arg(long, default_value_t = 64)]
    pub dim: usize,
    /// Projection count D = n E; must be a multiple of the padded dimension.
    #[arg(long, default_value_t = 512)]
    pub features: usize,
    #[arg(long, default_value_t = 100)]
    pub pairs: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, env = "MCK_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// JSON path (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub train_images: PathBuf,
    #[arg(long)]
    pub train_labels: PathBuf,
    #[arg(long)]
    pub test_images: PathBuf,
    #[arg(long)]
    pub test_labels: PathBuf,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long, default_value_t = 0.001)]
    pub lr: f64,
    #[arg(long, default_value_t = 10)]
    pub batch: usize,
    #[arg(long, default_value_t = 20)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.0)]
    pub l2: f64,
    /// Shuffle seed (default: --seed).
    #[arg(long)]
    pub shuffle_seed: Option<u64>,
    #[arg(long)]
    pub subset_train: Option<usize>,
    #[arg(long)]
    pub subset_test: Option<usize>,
    /// Cache all feature vectors before the first epoch.
    #[arg(long)]
    pub precompute: bool,
    /// CSV path (default: stdout).
    #[arg(long)]
    pub metrics_out: Option<PathBuf>,
    #[arg(long)]
    pub model_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    /// Checkpoint written by `train --model-out`.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub test_images: PathBuf,
    #[arg(long)]
    pub test_labels: PathBuf,
    #[arg(long)]
    pub subset_test: Option<usize>,
    /// Subset seed.
    #[arg(long, env = "MCK_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// JSON path (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn run(cli: Cli) -> error::Result<()> {
    if let Some(workers) = cli.workers {
        if workers == 0 {
            return Err(CliError::Validation("--workers must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| CliError::Validation(format!("worker pool: {e}")))?;
    }
    match cli.command {
        Command::BenchWht(a) => commands::bench_wht(&a),
        Command::Features(a) => commands::features(&a),
        Command::KernelCheck(a) => commands::kernel_check(&a),
        Command::Train(a) => commands::train(&a),
        Command::Eval(a) => commands::eval(&a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
