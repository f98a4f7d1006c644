//! Command-line driver for the wealthmap pipeline.
//!
//! Each subcommand runs one stage and leaves its output as a plain file in
//! the output directory, so the next stage (or a person) can pick it up:
//!
//! ```text
//! synth -> features -> targets -> train -> explain / predict
//!                               \-> benchmark
//! ```
//!
//! Exit codes: 0 on success, 2 for bad input (including usage errors), 3
//! when a numerical step fails.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use config::{PipelineConfig, Settings};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] wealthmap::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Core(e.into())
    }
}

#[derive(Debug, Parser)]
#[command(name = "wealthmap", version, about = "Small-area wealth estimation from open geospatial data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand. Each overrides the matching config key.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Pipeline config (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every random choice; required here or in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory; also where inputs are looked up by default.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic scene with known latent wealth.
    Synth(Common),
    /// Assemble the per-cluster feature matrix.
    Features(Common),
    /// Compute the wealth index and household indicators per cluster.
    Targets(Common),
    /// Fit the configured model on all clusters.
    Train(Common),
    /// Cross-validate every model family on every source group.
    Benchmark(Common),
    /// Shapley explanations for a trained tree ensemble.
    Explain {
        #[command(flatten)]
        common: Common,
        /// Cluster ids that get a force-plot file, comma separated.
        #[arg(long, value_delimiter = ',')]
        rows: Option<Vec<String>>,
    },
    /// Predict with a trained model.
    Predict(Common),
}

/// Parse `args` (program name first) and run the subcommand.
pub fn run<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.render().to_string().trim_end().to_string())),
    };
    let (common, rows) = match &cli.command {
        Command::Explain { common, rows } => (common, rows.clone()),
        Command::Synth(c)
        | Command::Features(c)
        | Command::Targets(c)
        | Command::Train(c)
        | Command::Benchmark(c)
        | Command::Predict(c) => (c, None),
    };
    let mut settings = Settings::load(common.config.as_deref(), common.seed, common.out.as_deref())?;
    if rows.is_some() {
        settings.config.explain.rows = rows;
    }
    std::fs::create_dir_all(&settings.out)?;
    match cli.command {
        Command::Synth(_) => commands::synth(&settings),
        Command::Features(_) => commands::features(&settings),
        Command::Targets(_) => commands::targets(&settings),
        Command::Train(_) => commands::train(&settings),
        Command::Benchmark(_) => commands::benchmark(&settings),
        Command::Explain { .. } => commands::explain(&settings),
        Command::Predict(_) => commands::predict(&settings),
    }
}
