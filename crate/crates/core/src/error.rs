use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("system size {n} outside supported range {min}..={max}")]
    Size { n: usize, min: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("announced outcomes have zero probability: {0}")]
    ImpossibleOutcome(String),

    #[error("round {round} out of range for sequences of length {len}")]
    RoundOutOfRange { round: usize, len: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not enough surviving rounds: need {needed}, have {available}")]
    Capacity { needed: usize, available: usize },

    #[error("no conflicting messages, adjudication not needed")]
    NoConflict,

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
