use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("unknown benchmark function {0:?}; see `optimice list-functions`")]
    UnknownFunction(String),

    #[error("{label}: point {point:?} lies outside the domain")]
    OutOfDomain { label: String, point: Vec<f64> },

    #[error("relative error is undefined for a zero optimum; judge against the stored targets")]
    ZeroOptimum,

    #[error("scaling factors must be positive, got vertical {vertical}, horizontal {horizontal}")]
    InvalidScaling { vertical: f64, horizontal: f64 },

    #[error("invalid campaign config: {0}")]
    Config(String),

    #[error(transparent)]
    Optimizer(#[from] optimice_core::Error),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, BenchError>;
