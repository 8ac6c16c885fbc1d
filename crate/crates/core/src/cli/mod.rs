//! Command-line front end: argument parsing, run configuration, CSV
//! emission and the `simulate`, `analyze` and `optimize` commands.
//!
//! Exit codes are stable: 0 success, 1 configuration error, 2 I/O error,
//! 3 non-convergence of the optimal-control sweep.

mod args;
mod commands;
mod config;
mod csv_io;
mod plot;

use std::fmt;

pub use args::{Cli, Command, IntegratorKind, RunArgs, VariantKind};
pub use commands::{cmd_analyze, cmd_optimize, cmd_simulate, run};
pub use config::{parse_config_text, RunConfig};
pub use csv_io::{read_trajectory_csv, write_trajectory_csv};
pub use plot::plot_script;

/// Environment variable selecting the diagnostic level on standard error.
pub const LOG_ENV: &str = "VECTORIAL_LOG";

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    /// The sweep stopped at its iteration budget (or diverged).
    NotConverged(String),
    Model(crate::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Model(_) => 1,
            CliError::Io(_) => 2,
            CliError::NotConverged(_) => 3,
        }
    }

    pub(crate) fn io(path: &std::path::Path, e: impl fmt::Display) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::NotConverged(m) => write!(f, "not converged: {m}"),
            CliError::Model(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        match e {
            crate::Error::Divergence { .. } => CliError::NotConverged(e.to_string()),
            crate::Error::InvalidParameter { .. } | crate::Error::ControlOutOfRange(_) => {
                CliError::Config(e.to_string())
            }
            other => CliError::Model(other),
        }
    }
}

/// Installs the logger reading its level from [`LOG_ENV`] (default `error`).
pub fn init_logging() {
    let env = env_logger::Env::new().filter_or(LOG_ENV, "error");
    let _ = env_logger::Builder::from_env(env)
        .format_timestamp(None)
        .try_init();
}
