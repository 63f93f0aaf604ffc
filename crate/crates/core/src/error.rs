use thiserror::Error;

use crate::spectrum::HalfInt;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("expected {expected} amplitudes, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("cannot normalize the zero vector")]
    ZeroVector,

    #[error("mode layouts differ: {0}")]
    ModeMismatch(String),

    #[error("{value} is not on the {what} ladder")]
    OffLadder { what: &'static str, value: HalfInt },

    #[error("ancilla half-width {b} is smaller than input half-width {a}")]
    AncillaTooSmall { a: HalfInt, b: HalfInt },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("state file: {0}")]
    StateFile(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
