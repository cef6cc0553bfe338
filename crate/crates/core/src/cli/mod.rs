//! Command-line front end: `simulate`, `estimate` and `phasespace`.
//!
//! Every run is driven by one JSON configuration. Outputs are assembled in
//! memory, then each file is written under a temporary name and renamed.
//! Exit code 1 reports configuration or input errors, 2 numerical failures.

mod config;
mod estimate;
mod files;
mod phasespace;
mod simulate;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{
    default_thetas, AnalysisConfig, BayesConfig, Dynamics, ExperimentConfig, PhaseSpaceConfig, PulseConfig,
    PulsesConfig, RunConfig, SamplingConfig, TomographyConfig, TrajectoryStart,
};
pub use estimate::{cmd_estimate, BayesSummary, EstimateReport, JackknifeEntry, TomographySummary};
pub use files::{setting_stream, stem_for, write_atomic};
pub use phasespace::cmd_phasespace;
pub use simulate::cmd_simulate;

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "spinfisher", version, about = "Collective-spin simulation and Fisher-information estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, overriding the configuration.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed override.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; falls back to SPINFISHER_THREADS.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate histograms for every (time, α, θ) setting.
    Simulate,
    /// Analyse a directory of histograms.
    Estimate {
        #[arg(long)]
        input: PathBuf,
    },
    /// Classical fixed points, separatrix and trajectories.
    Phasespace,
}

/// Process exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument(_)
        | Error::Parse(_)
        | Error::Json(_)
        | Error::Io(_)
        | Error::BinningMismatch(_)
        | Error::NonCommensurate { .. } => 1,
        _ => 2,
    }
}

fn thread_count(cli: &Cli) -> Result<Option<usize>> {
    if let Some(t) = cli.threads {
        return Ok(Some(t));
    }
    match std::env::var("SPINFISHER_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::InvalidArgument(format!("SPINFISHER_THREADS={v} is not a thread count"))),
        Err(_) => Ok(None),
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    match &cli.config {
        Some(p) => RunConfig::load(p),
        None => match cli.command {
            Command::Estimate { .. } => RunConfig::from_json("{}"),
            _ => Err(Error::InvalidArgument("--config is required".into())),
        },
    }
}

fn output_dir(cli: &Cli, cfg: &RunConfig) -> Result<PathBuf> {
    cli.out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .ok_or_else(|| Error::InvalidArgument("no output directory: pass --out or set output_dir".into()))
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    let out = output_dir(cli, &cfg)?;
    let threads = thread_count(cli)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(Error::InvalidArgument("thread count must be positive".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| Error::InvalidArgument(e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::Simulate => cmd_simulate(&cfg, &out, cli.seed),
        Command::Estimate { input } => cmd_estimate(input, &cfg.analysis, &out, cli.seed).map(|_| ()),
        Command::Phasespace => cmd_phasespace(&cfg, &out),
    })
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
