use thiserror::Error;

pub type Result<T, E = QruError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum QruError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// Parameter or feature vector does not match the circuit layout.
    #[error("layout mismatch: {0}")]
    Layout(String),
    /// Malformed data file or record; `row` is the 1-based line number.
    #[error("data error at row {row}: {msg}")]
    Data { row: usize, msg: String },
    #[error("invalid state: {0}")]
    State(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl QruError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        QruError::InvalidInput(msg.into())
    }

    pub(crate) fn layout(msg: impl Into<String>) -> Self {
        QruError::Layout(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        QruError::Numeric(msg.into())
    }
}
