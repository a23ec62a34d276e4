use std::path::PathBuf;

use thiserror::Error;

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error(transparent)]
    Core(#[from] kexpand::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        use kexpand::Error as E;
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Numeric(_) => EXIT_NUMERIC,
            CliError::Io { .. } | CliError::Json { .. } => EXIT_IO,
            CliError::Core(e) => match e {
                E::Io { .. } | E::BadMagic { .. } | E::Truncated { .. } | E::CountMismatch { .. } => EXIT_IO,
                E::DegenerateGaussian | E::NotPositiveDefinite { .. } | E::Singular(_) => EXIT_NUMERIC,
                _ => EXIT_VALIDATION,
            },
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
