//! Experiment drivers for the `vantrees-lab` command line tool.
//!
//! The binary is a thin argument parser; everything it does goes through
//! [`run`] so integration tests can execute experiments in-process:
//!
//! ```no_run
//! use vantrees_lab::{run, Experiment, Overrides};
//! let files = run(Experiment::Scaling, "scaling.toml".as_ref(), &Overrides::default())?;
//! # Ok::<(), vantrees_lab::CliError>(())
//! ```
//!
//! Errors carry process exit codes: 0 success, 2 configuration error,
//! 3 convergence failure, 1 anything else (I/O, internal).

use std::path::{Path, PathBuf};

use thiserror::Error;

pub mod config;
mod experiments;
mod output;
mod svg;

pub use config::{Experiment, Overrides, RawConfig, ResolvedConfig};

/// Everything that can go wrong running an experiment, with the process
/// exit code it maps to.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable/invalid config file, bad values, or guard violations.
    #[error("config error: {0}")]
    Config(String),
    /// Output directory or file could not be written.
    #[error("i/o error: {0}")]
    Io(String),
    /// A Monte-Carlo dimension sweep ended without stabilizing.
    #[error("convergence failure: {0}")]
    Convergence(String),
    /// Invariant violations inside the numerical core.
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Convergence(_) => 3,
            CliError::Io(_) | CliError::Internal(_) => 1,
        }
    }
}

/// Load a config file, apply overrides, and run the experiment. Returns the
/// paths of every file written, in the order they were written.
pub fn run(
    experiment: Experiment,
    config_path: &Path,
    overrides: &Overrides,
) -> Result<Vec<PathBuf>, CliError> {
    let raw = config::load_config(config_path)?;
    let cfg = config::resolve(experiment, &raw, overrides)?;
    run_resolved(&cfg)
}

/// Run an already-resolved configuration (the in-process test entry point).
pub fn run_resolved(cfg: &ResolvedConfig) -> Result<Vec<PathBuf>, CliError> {
    match cfg.experiment.as_str() {
        "fig1" => experiments::cmd_fig1(cfg),
        "fig2" => experiments::cmd_fig2(cfg),
        "scaling" => experiments::cmd_scaling(cfg),
        "zq-single" => experiments::cmd_zq_single(cfg),
        "adaptive-single" => experiments::cmd_adaptive_single(cfg),
        other => Err(CliError::Internal(format!("unknown experiment {other:?}"))),
    }
}
