use std::fmt;

use qru_core::QruError;

/// Failure classes, each with its own process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config keys or values. Exit code 1.
    Usage(String),
    /// Unreadable or malformed input data, or unwritable output. Exit code 2.
    Data(String),
    /// Non-finite values or failed factorizations during a run. Exit code 3.
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numeric(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<QruError> for CliError {
    fn from(e: QruError) -> Self {
        let msg = e.to_string();
        match e {
            QruError::InvalidInput(_) | QruError::State(_) => CliError::Usage(msg),
            QruError::Layout(_) | QruError::Data { .. } | QruError::Io(_) => CliError::Data(msg),
            QruError::Numeric(_) => CliError::Numeric(msg),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
