use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error at {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("unsupported quantifier prefix: {0}")]
    UnsupportedPrefix(String),
    #[error("degenerate relator spec: {0}")]
    DegenerateSpec(String),
    #[error("invalid relator spec: {0}")]
    InvalidSpec(String),
    #[error("tuning failed after {attempts} attempts; best lambda {best_lambda}, best T {best_t}")]
    TuningFailed {
        attempts: usize,
        best_lambda: String,
        best_t: u64,
    },
    #[error("presentation is not C'(1/6); refusing to certify: {0}")]
    UnsoundPresentation(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn parse(position: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            position,
            message: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
