//! Benchmark suite and campaign harness for the batch surrogate optimizer:
//! the sixteen standard test functions with their published targets, trial
//! metrics, and a reproducible multi-trial campaign runner with CSV
//! outputs.

pub mod campaign;
pub mod error;
pub mod functions;
pub mod metrics;

pub use error::{BenchError, Result};
