use thiserror::Error;

/// Harness-level errors, mapped onto the CLI exit-code classes:
/// 1 usage, 2 infeasible design, 3 I/O.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] semicp_core::Error),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) => 1,
            HarnessError::Core(e) if e.is_infeasible_design() => 2,
            HarnessError::Core(_) => 1,
            HarnessError::Io { .. } => 3,
        }
    }
}
