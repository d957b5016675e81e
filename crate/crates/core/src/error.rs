use thiserror::Error;

use crate::group::GroupFamily;

#[derive(Debug, Error)]
pub enum CoorbitError {
    #[error("invalid group element: {0}")]
    InvalidElement(String),

    #[error("family mismatch: {left} vs {right}")]
    FamilyMismatch { left: GroupFamily, right: GroupFamily },

    #[error("{family} does not support {operation}")]
    Unsupported {
        family: GroupFamily,
        operation: &'static str,
    },

    #[error("point ({0}, {1}) is not in the dual orbit")]
    OffOrbit(f64, f64),

    #[error("bump ball is not contained in the dual orbit (margin {margin:.6})")]
    BallNotInOrbit { margin: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CoorbitError>;

pub(crate) fn invalid(msg: impl Into<String>) -> CoorbitError {
    CoorbitError::InvalidParameter(msg.into())
}
