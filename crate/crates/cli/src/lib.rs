//! Command-line front end: training runs, the kernel-theory commands and
//! checkpoint selection.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

mod commands;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// An error with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub source: anyhow::Error,
}

impl CliError {
    pub fn usage(source: impl Into<anyhow::Error>) -> Self {
        Self { code: EXIT_USAGE, source: source.into() }
    }

    pub fn numeric(source: impl Into<anyhow::Error>) -> Self {
        Self { code: EXIT_NUMERIC, source: source.into() }
    }
}

impl From<resistlab::Error> for CliError {
    fn from(e: resistlab::Error) -> Self {
        use resistlab::Error::*;
        let code = match e {
            Numeric(_) | UndefinedMetric(_) => EXIT_NUMERIC,
            _ => EXIT_USAGE,
        };
        Self { code, source: e.into() }
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "resistlab", version, about = "Memorization of noisy labels at desk scale")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one or more runs from JSON configs and write their run logs.
    Train(TrainArgs),
    /// Infinite-width kernel theory.
    #[command(subcommand)]
    Ntk(NtkCommand),
    /// Partition checkpoints from run logs into the four regions.
    Select(SelectArgs),
    /// Kernel closed-form checks.
    #[command(subcommand)]
    Gram(GramCommand),
}

#[derive(Debug, Subcommand)]
pub enum NtkCommand {
    /// Monte Carlo bound curves over an (LNL, k-tilde) grid, as CSV.
    Bounds(BoundsArgs),
    /// Two-phase gradient descent on a finite network against the closed form.
    Validate(ValidateArgs),
}

#[derive(Debug, Subcommand)]
pub enum GramCommand {
    /// Closed-form kernel entries against Monte Carlo expectations.
    Check(GramCheckArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Run configuration (repeatable).
    #[arg(long = "config", required = true)]
    pub configs: Vec<PathBuf>,
    /// Run-log path; only valid with a single config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory for `<run_id>.csv` logs of configs without an output path.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub noise_level: Option<f64>,
    #[arg(long)]
    pub run_id: Option<String>,
    /// Runs executed concurrently.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// IDX image file; synthetic sphere data is used when absent.
    #[arg(long, requires = "idx_labels")]
    pub idx_images: Option<PathBuf>,
    #[arg(long, requires = "idx_images")]
    pub idx_labels: Option<PathBuf>,
    /// Number of samples (prefix of the IDX file, or synthetic size).
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Dimension of synthetic inputs.
    #[arg(long, default_value_t = 16)]
    pub d: usize,
    #[arg(long, default_value_t = 2000)]
    pub max_n: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub eta: f64,
    #[arg(long, default_value_t = 10_000)]
    pub k: usize,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
    pub lnl: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0,2000,4000,6000,8000,10000,12000,14000,16000,18000,20000")]
    pub k_tilde: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub draws: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = 32)]
    pub n: usize,
    #[arg(long, default_value_t = 16)]
    pub d: usize,
    #[arg(long, default_value_t = 16384)]
    pub m: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub kappa: f64,
    /// Absolute step size; overrides `--eta-factor`.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Step size as a fraction of `1 / lambda_max`.
    #[arg(long, default_value_t = 1e-3)]
    pub eta_factor: f64,
    #[arg(long, default_value_t = 200)]
    pub k: usize,
    #[arg(long, value_delimiter = ',', default_value = "0,100,400")]
    pub k_tilde: Vec<usize>,
    #[arg(long, default_value_t = 0.0)]
    pub lnl: f64,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub seeds: Vec<u64>,
    /// Repeat every run at twice the width and report error shrinkage.
    #[arg(long)]
    pub m_sweep: bool,
    /// Optional JSON report.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    /// Run-log paths or glob patterns.
    #[arg(long = "logs", required = true, num_args = 1..)]
    pub logs: Vec<String>,
    /// Percentile thresholds `ZETA,TRAIN_ACC` instead of the means.
    #[arg(long, value_delimiter = ',')]
    pub percentile: Option<Vec<f64>>,
    /// Omit every test-accuracy statistic.
    #[arg(long)]
    pub blind: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GramCheckArgs {
    /// Random unit-vector pairs checked in addition to an identical and an antipodal pair.
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    /// Monte Carlo weight draws per pair.
    #[arg(long, default_value_t = 1_000_000)]
    pub mc: usize,
    #[arg(long, default_value_t = 8)]
    pub d: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Train(args) => commands::train::run(&args),
        Command::Ntk(NtkCommand::Bounds(args)) => commands::ntk::bounds(&args),
        Command::Ntk(NtkCommand::Validate(args)) => commands::ntk::validate(&args),
        Command::Select(args) => commands::select::run(&args),
        Command::Gram(GramCommand::Check(args)) => commands::gram::check(&args),
    }
}
