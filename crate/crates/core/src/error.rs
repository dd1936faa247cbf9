//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration or invalid argument values.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Not enough rows for the requested operation.
    #[error("insufficient sample size for {what}: need at least {needed}, got {got}")]
    SampleSize {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    /// Shape disagreement between inputs.
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// Normal equations stayed singular even after regularization.
    #[error("rank-deficient system: {dims} input dimensions could not be resolved")]
    RankDeficient { dims: usize },

    /// Every response column had zero variance on the scored partition.
    #[error("zero variance in {what}; coefficient of determination is undefined")]
    ZeroVariance { what: &'static str },

    /// Non-finite values where finite ones are required.
    #[error("non-finite values in {what}")]
    NonFinite { what: &'static str },

    /// Optimization produced a non-finite loss.
    #[error("training diverged at epoch {epoch} (loss = {loss})")]
    Training { epoch: usize, loss: f64 },

    /// An estimate with no selected components cannot be used for prediction.
    #[error("degenerate shared estimate: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    /// Malformed or incompatible on-disk artifacts.
    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    /// True for errors caused by bad user input rather than runtime failure.
    /// The CLI maps these to exit code 1, everything else to 2.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::SampleSize { .. }
                | Error::DimensionMismatch { .. }
                | Error::NonFinite { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
