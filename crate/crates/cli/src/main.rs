//! `sparse-doppler`: design sparse slow-time emission patterns and estimate
//! Doppler spectra and spectrograms from the resulting samples.
//!
//! Exit status is 0 on success, 2 for configuration errors and 3 for
//! numeric or precondition failures. `SPARSE_DOPPLER_THREADS` sets the
//! worker count.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sparse_doppler::array_design::NestedPreference;
use sparse_doppler::experiments::{Estimator, OutputFormat};

pub const THREADS_ENV: &str = "SPARSE_DOPPLER_THREADS";

#[derive(Parser, Debug)]
#[command(name = "sparse-doppler", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Report the minimal pattern for a window size.
    Design(DesignArgs),
    /// Generate slow-time snapshots for every frame of the config.
    Simulate(Common),
    /// Estimate the spectrum of a single CPI.
    Estimate(Common),
    /// One spectrum per frame, rendered to an image and CSV.
    Spectrogram(Common),
    /// Frequency MSE against SNR.
    Mse(Common),
    /// All estimators on one dataset with ridge and artifact statistics.
    Compare(Common),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// JSON experiment config; defaults apply to every missing field.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Threshold for both NEST and the NESPRIT rank rule.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Pattern as `family` or `family:a,b,...`, e.g. `nested:15,16`.
    #[arg(long)]
    pub pattern: Option<String>,
    /// Run only this estimator.
    #[arg(long, value_enum)]
    pub estimator: Option<EstimatorArg>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Args, Debug, Clone)]
pub struct DesignArgs {
    #[command(flatten)]
    pub common: Common,
    /// Window size; taken from the config when absent.
    #[arg(short = 'P', long = "window")]
    pub window: Option<usize>,
    #[arg(long, value_enum, default_value = "fewer-larger-gaps")]
    pub preference: PreferenceArg,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum EstimatorArg {
    Nest,
    Nesprit,
    Welch,
}

impl From<EstimatorArg> for Estimator {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::Nest => Estimator::Nest,
            EstimatorArg::Nesprit => Estimator::Nesprit,
            EstimatorArg::Welch => Estimator::Welch,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum FormatArg {
    Csv,
    Json,
    Pgm,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Pgm => OutputFormat::Pgm,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum PreferenceArg {
    FewerLargerGaps,
    MoreSmallerGaps,
}

impl From<PreferenceArg> for NestedPreference {
    fn from(p: PreferenceArg) -> Self {
        match p {
            PreferenceArg::FewerLargerGaps => NestedPreference::FewerLargerGaps,
            PreferenceArg::MoreSmallerGaps => NestedPreference::MoreSmallerGaps,
        }
    }
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got '{v}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| format!("cannot start {n} worker threads: {e}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = init_threads() {
        eprintln!("error: [experiments] config error: {msg}");
        return ExitCode::from(2);
    }
    let result = match cli.command {
        Command::Design(a) => commands::design(&a),
        Command::Simulate(c) => commands::simulate(&c),
        Command::Estimate(c) => commands::estimate(&c),
        Command::Spectrogram(c) => commands::spectrogram(&c),
        Command::Mse(c) => commands::mse(&c),
        Command::Compare(c) => commands::compare(&c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
