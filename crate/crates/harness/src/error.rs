use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{path}: {reason}")]
    Parse { path: PathBuf, reason: String },

    #[error(transparent)]
    Core(#[from] multiscaling::Error),

    #[error("grid point {grid_value}: {failed} of {n_sims} simulations failed (limit {limit}); first error: {first_error}")]
    GridPointAborted { grid_value: f64, failed: usize, n_sims: usize, limit: usize, first_error: String },

    #[error("output directory {0} holds a different experiment configuration")]
    ConfigMismatch(PathBuf),

    #[error("report has no rows")]
    EmptyReport,
}

impl HarnessError {
    /// Stable identifier for machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            HarnessError::Config(_) => "config",
            HarnessError::Io { .. } => "io",
            HarnessError::Parse { .. } => "parse",
            HarnessError::Core(_) => "core",
            HarnessError::GridPointAborted { .. } => "grid_point_aborted",
            HarnessError::ConfigMismatch(_) => "config_mismatch",
            HarnessError::EmptyReport => "empty_report",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
