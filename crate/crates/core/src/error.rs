use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the simulator and its analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("negative distance {0} km")]
    NegativeDistance(f64),

    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("giant cluster has {0} node(s); at least 2 are needed for path lengths")]
    GiantClusterTooSmall(usize),

    #[error("no crossing between sizes {small} and {large} in the sampled range")]
    NoCrossing { small: usize, large: usize },

    #[error("rescaled supports do not overlap")]
    NonOverlappingSupport,

    #[error("collapse refinement did not converge (best quality {quality})")]
    NonConvergence { quality: f64 },

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("schema error in {path}: {reason}")]
    Schema { path: PathBuf, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("missing inputs: {0:?}")]
    MissingInputs(Vec<String>),

    #[error("interrupted")]
    Interrupted,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
