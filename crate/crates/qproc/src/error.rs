//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("ill-conditioned design: {0}")]
    IllConditioned(String),

    #[error("fit failed: {0}")]
    FitFailure(String),

    #[error("incomplete calibration: transition-matrix columns {missing:?} were never observed")]
    IncompleteCalibration { missing: Vec<usize> },

    #[error("degenerate row {row}: every column modulus is numerically zero")]
    DegenerateRow { row: usize },

    #[error("numerically singular matrix (smallest singular value {smallest_sv:.3e})")]
    SingularMatrix { smallest_sv: f64 },

    #[error("normalization mismatch: {0}")]
    NormalizationMismatch(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line front end.
    ///
    /// 2 marks configuration/validation problems, 3 marks numerical fit
    /// failures, everything else maps to 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_)
            | Error::DimensionMismatch(_)
            | Error::NormalizationMismatch(_)
            | Error::Config(_) => 2,
            Error::IllConditioned(_)
            | Error::FitFailure(_)
            | Error::IncompleteCalibration { .. }
            | Error::DegenerateRow { .. }
            | Error::SingularMatrix { .. } => 3,
            Error::Io(_) => 1,
        }
    }
}
