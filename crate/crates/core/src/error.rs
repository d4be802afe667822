use thiserror::Error;

/// Errors raised by the detection library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    Dimension {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid belief: {0}")]
    InvalidBelief(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid model: {}", .0.join("; "))]
    InvalidModel(Vec<String>),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{0} has zero probability from the current belief")]
    ZeroProbability(String),

    #[error("cost family `{family}` does not support {operation}")]
    FamilyMismatch {
        family: &'static str,
        operation: &'static str,
    },

    #[error("non-finite cost {value} at iteration {iteration}")]
    NonFiniteCost { iteration: usize, value: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
