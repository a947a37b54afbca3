use thiserror::Error;

pub type Result<T> = std::result::Result<T, DybmError>;

#[derive(Debug, Error)]
pub enum DybmError {
    /// A configuration invariant was violated. `field` names the offending entry.
    #[error("invalid configuration field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("time slice has {got} units, expected {expected}")]
    SliceLength { expected: usize, got: usize },

    #[error("invalid time slice value {value} at unit {unit}; only 0 and 1 are allowed")]
    SliceValue { unit: usize, value: i64 },

    #[error("units ({pre}, {post}) are not connected")]
    UnconnectedPair { pre: usize, post: usize },

    #[error("unit index {index} out of range for {n_units} units")]
    UnitIndex { index: usize, n_units: usize },

    #[error("series is empty")]
    EmptySeries,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("training diverged at epoch {epoch}, step {step}: {reason}")]
    Divergence {
        epoch: usize,
        step: usize,
        reason: String,
    },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl DybmError {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        DybmError::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
