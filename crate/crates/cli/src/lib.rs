//! Command-line front end: configuration files, subcommands and CSV output.

pub mod circuit_text;
pub mod commands;
pub mod config;
pub mod output;
pub mod presets;
pub mod runner;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use ionqec_core::backend::SimError;

/// Exit status for configuration and usage errors.
pub const EXIT_CONFIG: i32 = 2;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("simulation failed: {0}")]
    Run(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Run(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Run(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "ionqec", version, about = "Crosstalk-aware Steane-code QEC simulator for trapped-ion strings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML configuration file, or a CSV written by this tool.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Built-in configuration (see `ionqec presets`); `--config` is applied on top.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Master seed; overrides `run.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// auto, tableau, dense or paths; overrides `run.backend`.
    #[arg(long, global = true)]
    pub backend: Option<String>,
    /// Configuration override `section.key=value` (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the logical error rate for one configuration.
    Simulate,
    /// Estimate logical error rates over a parameter grid.
    Sweep,
    /// Lower a circuit file to native gates.
    Compile {
        input: PathBuf,
        /// Split MS gates and insert spectator refocussing pulses.
        #[arg(long)]
        refocus: bool,
        /// Ion layout used for spectators: `linear` or `steane`.
        #[arg(long, default_value = "linear")]
        layout: String,
    },
    /// Print the crosstalk infidelity budget of an MS gate.
    Analyze,
    /// Exact logical error rate by enumerating measurement paths.
    Paths,
    /// List built-in configurations.
    Presets,
}

/// Runs the tool and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.jobs {
        Some(0) => Err(CliError::Config("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Run(e.to_string()))
            .and_then(|pool| pool.install(|| commands::dispatch(&cli))),
        None => commands::dispatch(&cli),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("ionqec: {e}");
            e.exit_code()
        }
    }
}
