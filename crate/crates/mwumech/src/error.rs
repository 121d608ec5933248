use std::fmt;

use mwumech_core::Error;

/// Failure of a command, classified by exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Unreadable or invalid input; exit code 2.
    Input(String),
    /// The computation failed or violated a contract; exit code 1.
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Failure(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::DimensionMismatch { .. }
            | Error::InvalidArgument(_)
            | Error::Capacity { .. }
            | Error::Precondition(_)
            | Error::NoDemand => CliError::Input(e.to_string()),
            _ => CliError::Failure(e.to_string()),
        }
    }
}
