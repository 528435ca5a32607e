use thiserror::Error;

/// Errors produced by the workbench.
#[derive(Debug, Error)]
pub enum Error {
    /// A degree distribution violates its invariants (normalization, edge balance, sign).
    #[error("invalid degree distribution: {0}")]
    InvalidDistribution(String),
    /// A scalar parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// An input vector has the wrong length.
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    /// The received word contradicts a parity check it should satisfy.
    #[error("received word is inconsistent with check {check}")]
    Inconsistent { check: usize },
    /// Two known values disagree at a variable node.
    #[error("conflicting votes at variable {variable}")]
    ConflictingVotes { variable: usize },
    /// An operation was handed a received word from the wrong channel.
    #[error("wrong channel: {0}")]
    WrongChannel(String),
    /// A grid cannot represent the requested density.
    #[error("grid too narrow: {0}")]
    GridTooNarrow(String),
    /// Invalid simulation or command configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// Malformed input text (alist, channel strings, CSV).
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
