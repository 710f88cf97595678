use std::path::PathBuf;

/// Errors raised by the bound computations, samplers and estimators.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("probability {0} is outside the open interval (0, 1)")]
    Domain(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("degenerate marginal: standard deviation is zero")]
    DegenerateMarginal,

    #[error("unsupported marginal: {0}")]
    UnsupportedMarginal(String),

    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("condition not met: {0}")]
    ConditionNotMet(String),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("invalid subset: {0}")]
    InvalidSubset(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("failed to read {path}: {msg}")]
    Data { path: PathBuf, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
