use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("cost matrix must have at least one row and one column")]
    Empty,
    #[error("non-finite cost entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("invalid weights: {0}")]
    Weights(String),
    #[error("index out of range: {0}")]
    Index(String),
}

/// Configuration problems detected before any simulation work starts.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid configuration field `{field}`: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}
