use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vrpcast::ingest::InputMode;
use vrpcast::pipeline::{HiddenChoice, LagChoice};
use vrpcast::train::Algorithm;

#[derive(Debug, Parser)]
#[command(
    name = "vrpcast",
    version,
    about = "One-step-ahead forecasting of volcanic radiative power"
)]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a CSV series and report what was kept.
    Ingest(IngestArgs),
    /// KPSS level-stationarity test on the raw and the differenced series.
    Stationarity(DataArgs),
    /// Entropy profile over window lengths and the selected lag.
    Lags(LagsArgs),
    /// Run the pipeline and save the trained model and artifacts.
    Train(PipelineArgs),
    /// Iterated forecast from a saved model.
    Forecast(ForecastArgs),
    /// Run the pipeline and report error statistics, ACF match and t-tests.
    Evaluate(PipelineArgs),
    /// Train LM, SCG and BRNN on identical patterns and compare them.
    Compare(PipelineArgs),
    /// Write a seeded synthetic series as CSV.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV with `timestamp,vrp_watts` (power) or `timestamp,l_mir,l_mir_bk` (radiance).
    #[arg(long)]
    pub input: Option<PathBuf>,

    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<InputMode>,

    /// JSON pipeline configuration; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Directory for `series.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Directory for `stationarity.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LagsArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Use the pairwise histogram estimator with this many bins per axis.
    #[arg(long)]
    pub bins: Option<usize>,

    /// Largest window length in the profile.
    #[arg(long)]
    pub max_lag: Option<usize>,

    /// Only this leading fraction of the residuals is profiled.
    #[arg(long)]
    pub train_fraction: Option<f64>,

    /// Directory for `entropy_profile.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Window length: a positive integer or `auto`.
    #[arg(long, value_parser = parse_lag)]
    pub lag: Option<LagChoice>,

    /// Histogram bins for lag selection (switches to the histogram estimator).
    #[arg(long)]
    pub bins: Option<usize>,

    /// Hidden units: `n` or a grid-search range `a:b`.
    #[arg(long, value_parser = parse_hidden)]
    pub hidden: Option<HiddenChoice>,

    #[arg(long, value_enum)]
    pub algo: Option<AlgoArg>,

    #[arg(long)]
    pub train_fraction: Option<f64>,

    /// Horizon of the iterated forecast past the end of the series.
    #[arg(long)]
    pub steps: Option<usize>,

    #[arg(long)]
    pub max_epochs: Option<usize>,

    /// Seed for weight initialization; defaults to a fixed constant.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Artifact directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ForecastArgs {
    /// Model JSON written by `train`.
    #[arg(long)]
    pub model: PathBuf,

    #[arg(long, default_value_t = 1)]
    pub steps: usize,

    /// Directory for `forecast.csv` (defaults to the model's directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value_t = SynthKind::Bursts)]
    pub kind: SynthKind,

    /// Number of observations.
    #[arg(long, default_value_t = 4713)]
    pub n: usize,

    /// Comma-separated AR coefficients (for `--kind ar`).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub coefficients: Option<Vec<f64>>,

    /// Innovation standard deviation (white noise, random walk, AR).
    #[arg(long)]
    pub sigma: Option<f64>,

    #[arg(long)]
    pub seed: Option<u64>,

    /// JSON generator configuration; replaces `--kind`, `--n` and the
    /// shape flags.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Output CSV file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AlgoArg {
    Lm,
    Scg,
    Brnn,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Lm => Algorithm::Lm,
            AlgoArg::Scg => Algorithm::Scg,
            AlgoArg::Brnn => Algorithm::Brnn,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SynthKind {
    Bursts,
    WhiteNoise,
    RandomWalk,
    Ar,
}

fn parse_mode(s: &str) -> Result<InputMode, String> {
    s.parse().map_err(|e: vrpcast::Error| e.to_string())
}

fn parse_lag(s: &str) -> Result<LagChoice, String> {
    s.parse().map_err(|e: vrpcast::Error| e.to_string())
}

fn parse_hidden(s: &str) -> Result<HiddenChoice, String> {
    s.parse().map_err(|e: vrpcast::Error| e.to_string())
}
