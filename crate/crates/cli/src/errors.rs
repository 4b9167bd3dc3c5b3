//! Error type shared by the CLI layers, split by exit code.

use std::fmt;
use std::path::Path;

/// What went wrong, at the granularity the process exit code needs:
/// invalid input exits 1, I/O failure exits 2.
#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Io(String),
}

impl CliError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError::Invalid(msg.into())
    }

    /// Wraps an I/O error with the path it happened on.
    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Invalid(msg) => write!(f, "invalid input: {msg}"),
            CliError::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<geopers_core::Error> for CliError {
    fn from(err: geopers_core::Error) -> Self {
        match err {
            geopers_core::Error::InvalidInput(msg) => CliError::Invalid(msg),
            geopers_core::Error::UnsupportedConfiguration(msg) => {
                CliError::Invalid(format!("unsupported configuration: {msg}"))
            }
        }
    }
}
