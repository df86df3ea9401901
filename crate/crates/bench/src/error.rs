use acl_core::AclError;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Core(#[from] AclError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{line}: {source}")]
    Json { path: String, line: usize, source: serde_json::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("bad weights file: {0}")]
    Weights(String),
    #[error("invalid argument: {0}")]
    Argument(String),
}

pub type BenchResult<T> = Result<T, BenchError>;

impl BenchError {
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        BenchError::Io { path: path.display().to_string(), source }
    }

    /// Process exit code: 2 for configuration errors, 3 for degenerate
    /// statistics, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Core(AclError::DegenerateSamples(_)) => 3,
            BenchError::Core(_) | BenchError::Argument(_) => 2,
            _ => 1,
        }
    }
}
