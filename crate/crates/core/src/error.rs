use thiserror::Error;

use crate::word::Letter;

#[derive(Debug, Error)]
pub enum Error {
    #[error("letter {letter} outside the alphabet {{0..{d}}}")]
    LetterOutOfRange { letter: Letter, d: usize },

    #[error("word {0} contains the time letter; this pairing is for Brownian motion without time")]
    TimeLetterNotAllowed(String),

    #[error("binary pattern {0} must be empty or end in 1")]
    InvalidPattern(String),

    #[error("degenerate inner product; no canonical complement chosen (degree {degree})")]
    DegenerateGram { degree: usize },

    #[error("functional not quasi-definite at degree {0}")]
    NotQuasiDefinite(usize),

    #[error("matrix is rank deficient: rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },

    #[error("block {0} is not positive definite")]
    NotPositiveDefinite(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("target has zero variance; R² is undefined")]
    ZeroVariance,

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
