//! Library side of the `ensemble` command-line tool: input documents, the
//! result document, and one function per subcommand.

pub mod commands;
pub mod document;
pub mod input;

use thiserror::Error;

/// Failure of a subcommand, mapped onto the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable, malformed or invalid input.
    #[error("{0}")]
    Input(String),
    /// A numerical check failed.
    #[error("{0}")]
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Check(_) => 2,
        }
    }

    /// Wraps a library error raised while handling `context`.
    pub fn from_core(context: &str, err: ensemble_core::Error) -> CliError {
        match err {
            ensemble_core::Error::Validation(m) => CliError::Input(format!("{context}: {m}")),
            ensemble_core::Error::Numerical(m) => CliError::Check(format!("{context}: {m}")),
        }
    }
}
