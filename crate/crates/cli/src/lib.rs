//! Library surface of the `spdc` command-line tool, exposed so the
//! integration tests can drive commands directly.

pub mod commands;
pub mod config;
pub mod output;

use std::fmt;

/// CLI-level error with its process exit code: 1 for invalid input or
/// configuration, 2 for fit non-convergence.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    NonConvergence(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn non_convergence(msg: impl Into<String>) -> Self {
        CliError::NonConvergence(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::NonConvergence(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(msg) => write!(f, "{msg}"),
            CliError::NonConvergence(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<spdc_core::Error> for CliError {
    fn from(e: spdc_core::Error) -> Self {
        CliError::Input(e.to_string())
    }
}
