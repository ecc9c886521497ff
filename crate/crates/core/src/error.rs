use thiserror::Error;

/// A malformed instance or solution file.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(line: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum TapError {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("input graph is disconnected")]
    Disconnected,
    /// Some tree edge lies on no link path; `edge` uses 0-based node ids.
    #[error("infeasible instance: tree edge {}-{} is covered by no link", .edge.0 + 1, .edge.1 + 1)]
    Infeasible { edge: (usize, usize) },
    #[error("enumeration limit exceeded: {count} links > limit {limit}")]
    LimitExceeded { count: usize, limit: usize },
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl TapError {
    pub(crate) fn internal(message: impl Into<String>) -> Self {
        TapError::Internal(message.into())
    }
}

pub type Result<T, E = TapError> = std::result::Result<T, E>;
