use thiserror::Error;

/// Failure modes shared by every stage.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed input: out-of-range ids, inconsistent shapes.
    #[error("structural error: {0}")]
    Structural(String),
    /// A documented precondition does not hold.
    #[error("precondition violated: {0}")]
    Contract(String),
    /// An exhaustive oracle would exceed its enumeration budget.
    #[error("budget exceeded: {0}")]
    Budget(String),
    /// A randomized stage exhausted its retries.
    #[error("retry limit of {tries} exceeded: {detail}")]
    RetryExceeded { tries: usize, detail: String },
    /// Moser-Tardos did not converge; carries the surviving events.
    #[error("resampling did not converge within {rounds} rounds ({} events still fire)", surviving.len())]
    RoundLimit { rounds: usize, surviving: Vec<String> },
    /// A lift fell below the configured floor; the hierarchy must be redrawn.
    #[error("hierarchy must be resampled: {0}")]
    ResampleNeeded(String),
    /// Malformed file contents.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn structural<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Structural(msg.into()))
}

pub(crate) fn contract<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Contract(msg.into()))
}
