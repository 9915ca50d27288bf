use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An index, bound or product fell outside the representable or addressable range.
    #[error("out of range: {0}")]
    Range(String),
    /// The input lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A brute-force routine was asked for more than its configured cap.
    #[error("bound {requested} exceeds the brute-force cap {cap}")]
    Resource { requested: u64, cap: u64 },
    /// Interval evaluations overlapped; retry with a higher truncation.
    #[error("insufficient precision: {0}")]
    Precision(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
