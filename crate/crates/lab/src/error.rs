use std::path::PathBuf;

use thiserror::Error;

pub type LabResult<T> = Result<T, LabError>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error(transparent)]
    Core(#[from] thermal_mbqc::Error),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },

    #[error("N = {size}, T = {temperature}: Monte-Carlo warnings on {fraction} of trials (limit {limit})")]
    TooManyWarnings {
        size: usize,
        temperature: f64,
        fraction: f64,
        limit: f64,
    },

    #[error("thread pool: {0}")]
    Pool(String),
}

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        LabError::Parse {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit code: 2 for numerical non-convergence, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Core(thermal_mbqc::Error::NonConvergence { .. })
            | LabError::Core(thermal_mbqc::Error::NoCrossing)
            | LabError::TooManyWarnings { .. } => 2,
            _ => 1,
        }
    }
}
