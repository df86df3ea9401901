use alloc::string::String;

/// Errors raised by the curriculum toolkit.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AclError {
    #[error("invalid task space: {0}")]
    InvalidSpace(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("number of cuts per dimension must be at least 1")]
    ZeroCuts,
    #[error("task lies outside the task space (dimension {dim}, value {value})")]
    OutsideSpace { dim: usize, value: f64 },
    #[error("{0}")]
    MissingExpertKnowledge(String),
    #[error("{0}")]
    UnsupportedTeacher(String),
    #[error("unknown teacher `{0}`")]
    UnknownTeacher(String),
    #[error("unknown hyperparameter `{key}` for {teacher}")]
    UnknownHyperParameter { teacher: String, key: String },
    #[error("invalid value for hyperparameter `{key}`: {reason}")]
    InvalidHyperParameter { key: String, reason: String },
    #[error("need at least {needed} points to fit {needed} components, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("degenerate samples: {0}")]
    DegenerateSamples(&'static str),
    #[error("stump spacing must be positive")]
    ZeroSpacing,
    #[error("evaluation grids differ between groups: {0}")]
    MismatchedGrids(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid expert knowledge request: {0}")]
    InvalidExpertKnowledge(&'static str),
}

pub type Result<T> = core::result::Result<T, AclError>;
