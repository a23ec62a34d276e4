use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("empty permutation")]
    EmptyPermutation,

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("degenerate gaussian diagonal")]
    DegenerateGaussian,

    #[error("cholesky failed: non-positive pivot {value:e} at row {row}")]
    NotPositiveDefinite { row: usize, value: f64 },

    #[error("singular system at column {0}")]
    Singular(usize),

    #[error("sample {sample}, coordinate {coord}: value {value} outside [0, {bound}]")]
    OutOfBounds { sample: usize, coord: usize, value: f64, bound: f64 },

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("{path}: bad magic 0x{found:08x}, expected 0x{expected:08x}")]
    BadMagic { path: PathBuf, found: u32, expected: u32 },

    #[error("{path}: truncated at offset {offset}, needed {needed} more bytes")]
    Truncated { path: PathBuf, offset: usize, needed: usize },

    #[error("count mismatch: {images} images vs {labels} labels")]
    CountMismatch { images: usize, labels: usize },

    #[error("{path}: {source}")]
    Io { path: PathBuf, #[source] source: std::io::Error },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
