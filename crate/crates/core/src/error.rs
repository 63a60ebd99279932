use thiserror::Error;

/// Errors shared by the scoring modules (persona, socialrank, feedfilter).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoringError {
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("{what} out of range: {value}")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("{0} must not be empty")]
    Empty(&'static str),
    #[error("unknown user {0:?}")]
    UnknownUser(String),
    #[error("unknown post {0:?}")]
    UnknownPost(String),
}

pub type ScoringResult<T> = Result<T, ScoringError>;
