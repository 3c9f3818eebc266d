use thiserror::Error;

/// Errors surfaced by the numerical core.
///
/// Points carried inside variants are stored as `f64` regardless of the
/// scalar the computation ran at, so the error type stays non-generic.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid kernel configuration: {0}")]
    KernelConfig(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("covariance factorization failed after jitter ladder {tried:?}")]
    Factorization { tried: Vec<f64> },

    #[error(
        "degenerate geometry: mutual-information denominator {value:.3e} below floor at {point:?}"
    )]
    DegenerateDenominator { point: Vec<f64>, value: f64 },

    #[error("objective returned non-finite value {value} at {point:?}")]
    NonFiniteObjective { point: Vec<f64>, value: f64 },

    #[error("empty candidate set")]
    EmptyCandidates,
}

pub type Result<T> = std::result::Result<T, Error>;
