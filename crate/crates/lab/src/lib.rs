//! Configuration-driven experiments and verification suites on top of
//! `dynkin-core`.
//!
//! The `dynkin-lab` binary is a thin wrapper around [`run()`]: it reads a JSON
//! configuration ([`config`]), applies command-line overrides and writes
//! CSV tables plus a plain-text summary into an output directory.
//!
//! Exit statuses: 0 when everything ran (and every checked property held),
//! 1 on a property failure, 2 on usage or configuration errors, 3 on
//! numerical non-convergence.

pub mod config;
pub mod fft;
pub mod output;
pub mod run;
pub mod verify;

use std::fmt;

pub use config::{parse_config, ConfigError, ExperimentConfig};
pub use output::Provenance;
pub use run::{run, Command, Report};

/// Outcome class of a run, mapped to the process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    /// Everything ran and every checked property held.
    Pass = 0,
    /// A property failed.
    PropertyFailure = 1,
    /// Bad command line or configuration.
    Usage = 2,
    /// A quadrature did not converge.
    NonConvergence = 3,
}

impl Status {
    /// Process exit code.
    pub fn code(self) -> i32 {
        self as i32
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::PropertyFailure => "property failure",
            Status::Usage => "usage error",
            Status::NonConvergence => "non-convergence",
        })
    }
}

/// Errors that stop a command.
#[derive(Debug, thiserror::Error)]
pub enum LabError {
    /// The configuration was rejected.
    #[error("{path}: {source}")]
    Config {
        /// Config file path.
        path: String,
        /// Parse or validation error.
        source: ConfigError,
    },
    /// A numerical routine failed.
    #[error("{command} ({config}): {context}: {source}")]
    Core {
        /// Subcommand.
        command: &'static str,
        /// Config file path.
        config: String,
        /// Parameter values in effect.
        context: String,
        /// Underlying error.
        source: Box<dynkin_core::Error>,
    },
    /// Reading the config or writing results failed.
    #[error("{context}: {source}")]
    Io {
        /// What was being read or written.
        context: String,
        /// Underlying error.
        source: std::io::Error,
    },
}

impl LabError {
    /// Exit status for this error.
    pub fn status(&self) -> Status {
        match self {
            LabError::Core { source, .. } if source.is_non_convergence() => Status::NonConvergence,
            LabError::Config { .. } | LabError::Core { .. } => Status::Usage,
            LabError::Io { .. } => Status::Usage,
        }
    }
}
