//! Experiment orchestration for the Fuss-Catalan CLT toolkit: configuration,
//! the analytic and Monte Carlo pipelines, and machine-readable artifacts.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{run, RunContext, RunReport};
pub use config::{Command, ExperimentConfig, Overrides};
pub use error::{CliError, Result};

/// Environment variable holding the worker count. It is the only setting
/// read from the environment and never affects results.
pub const WORKERS_ENV: &str = "FCCLT_WORKERS";

pub fn workers_from_env() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(w) if w > 0 => Ok(Some(w)),
            _ => Err(CliError::Config(format!("{WORKERS_ENV} = `{v}` is not a positive integer"))),
        },
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::Config(format!("{WORKERS_ENV}: {e}"))),
    }
}
