use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, WaveError>;

#[derive(Debug, Error)]
pub enum WaveError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: line {line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("non-positive price {value} in series `{series}` on {date}")]
    NonPositivePrice { series: String, date: String, value: f64 },

    #[error("unknown or unsupported filter `{0}` (expected la8 or haar)")]
    UnknownFilter(String),

    #[error("filter `{name}` violates invariant: {reason}")]
    FilterInvariant { name: String, reason: String },

    #[error("level {level} exceeds the maximum {max} for a series of length {n}")]
    LevelTooLarge { level: usize, max: usize, n: usize },

    #[error("decompositions are not compatible: {0}")]
    Mismatch(String),

    #[error("zero variance at level {level}")]
    ZeroVariance { level: usize },

    #[error("singular regressor matrix at level {level}")]
    SingularMatrix { level: usize },

    #[error("exact reconstruction is undefined for {0} boundary decompositions")]
    NotReconstructible(&'static str),

    #[error("series is constant")]
    ConstantSeries,

    #[error("circulant embedding is not positive definite (min eigenvalue {min_eigenvalue:e})")]
    Embedding { min_eigenvalue: f64 },
}

impl WaveError {
    /// Stable short identifier used in machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            WaveError::Io { .. } => "io",
            WaveError::Parse { .. } => "parse",
            WaveError::InvalidParameter { .. } => "invalid_parameter",
            WaveError::InsufficientData(_) => "insufficient_data",
            WaveError::NonPositivePrice { .. } => "non_positive_price",
            WaveError::UnknownFilter(_) => "unknown_filter",
            WaveError::FilterInvariant { .. } => "filter_invariant",
            WaveError::LevelTooLarge { .. } => "level_too_large",
            WaveError::Mismatch(_) => "mismatch",
            WaveError::ZeroVariance { .. } => "zero_variance",
            WaveError::SingularMatrix { .. } => "singular_matrix",
            WaveError::NotReconstructible(_) => "not_reconstructible",
            WaveError::ConstantSeries => "constant_series",
            WaveError::Embedding { .. } => "embedding",
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        WaveError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
