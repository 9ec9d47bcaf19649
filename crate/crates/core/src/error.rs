use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the fitting pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("insufficient data: need at least {needed} {what}, got {got}")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("singular spatial basis (condition number {condition:.3e}); use a smaller q or larger parcels")]
    SingularBasis { condition: f64 },

    #[error("degenerate posterior: {0}")]
    DegeneratePosterior(String),

    #[error("parcel {parcel}, voxel {voxel}: {source}")]
    Parcel {
        parcel: usize,
        voxel: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("truncated payload: expected {expected} bytes, found {actual}")]
    TruncatedPayload { expected: u64, actual: u64 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code for the CLI, grouped by error category.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidSpec(_) | Error::DimensionMismatch(_) => 2,
            Error::Parse { .. } | Error::TruncatedPayload { .. } => 3,
            Error::Io { .. } => 4,
            Error::DegenerateDesign(_)
            | Error::InsufficientData { .. }
            | Error::SingularBasis { .. }
            | Error::DegeneratePosterior(_)
            | Error::Parcel { .. } => 5,
            Error::UndefinedMetric(_) => 6,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
