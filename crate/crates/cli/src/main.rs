//! `callvoice`: build call panels from transcripts and run the test battery.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};

use config::Overrides;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("statistical degeneracy: {0}")]
    Degenerate(String),
    #[error("{0}")]
    Leak(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Input(_) => 3,
            CliError::Degenerate(_) => 4,
            CliError::Leak(_) => 5,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "callvoice", version, about = "Speaker-aware earnings-call sentiment pipeline")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: OverrideArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct OverrideArgs {
    /// Directory for panels, weights and reports.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// First date of the test period (YYYY-MM-DD).
    #[arg(long, global = true)]
    training_cutoff: Option<NaiveDate>,
    /// Signal column used by the test stages.
    #[arg(long, global = true)]
    signal: Option<String>,
    /// Panel read by fit-weights and signals.
    #[arg(long, global = true)]
    panel: Option<PathBuf>,
    /// Panel read by the test stages.
    #[arg(long, global = true)]
    signals: Option<PathBuf>,
    /// Frozen section weights.
    #[arg(long, global = true)]
    weights: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// Build the call panel from the raw inputs.
    Ingest,
    /// Fit section weights on the training period and freeze them.
    FitWeights,
    /// Add the section-weighted columns using frozen weights.
    Signals,
    /// Monthly rank ICs by method, out-of-sample, and against the dictionary.
    Ic,
    /// Fama-MacBeth regressions with the earnings-surprise control.
    Fm,
    /// Five-factor alphas of the quintile long-short portfolio.
    Ff5,
    /// Pooled quintile sorts.
    Sorts,
    /// Signal quintiles within terciles of the control.
    Doublesort,
    /// Cumulative abnormal returns by signal quintile.
    Car,
    /// IC across return horizons.
    Decay,
    /// Run every stage and render all tables.
    Report,
}

#[derive(Subcommand, Debug)]
enum Command {
    #[command(flatten)]
    Stage(Stage),
    /// Write a synthetic fixture and a run config for it.
    Synth(commands::SynthArgs),
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::FitWeights => "fit-weights",
            Stage::Signals => "signals",
            Stage::Ic => "ic",
            Stage::Fm => "fm",
            Stage::Ff5 => "ff5",
            Stage::Sorts => "sorts",
            Stage::Doublesort => "doublesort",
            Stage::Car => "car",
            Stage::Decay => "decay",
            Stage::Report => "report",
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("CALLVOICE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config(format!("CALLVOICE_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let o = cli.overrides;
    let ov = Overrides {
        output_dir: o.output_dir,
        training_cutoff: o.training_cutoff,
        signal: o.signal,
        panel: o.panel,
        signals: o.signals,
        weights: o.weights,
    };
    match cli.command {
        Command::Synth(args) => commands::synth(&args),
        Command::Stage(stage) => {
            let path = cli
                .config
                .ok_or_else(|| CliError::Config(format!("{} needs --config", stage.name())))?;
            let cfg = config::RunConfig::load(&path, &ov)?;
            commands::run_stage(stage, &cfg)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("callvoice: {e}");
            ExitCode::from(e.code())
        }
    }
}
