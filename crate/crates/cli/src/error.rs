use std::path::PathBuf;

use l0pen::InstanceError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("solver failed: {0}")]
    Solver(#[from] l0pen::Error),
    /// The run finished but the result did not meet its tolerances.
    #[error("{0}")]
    Flagged(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 for solver-flagged results, 2 for usage, configuration and I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Flagged(_) => 1,
            Self::Solver(l0pen::Error::Unsupported(_)) => 2,
            Self::Solver(_) => 1,
            _ => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
