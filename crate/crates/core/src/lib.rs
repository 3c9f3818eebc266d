//! Batch surrogate-based global optimization.
//!
//! The optimizer maximizes an expensive black-box function by fitting a
//! Gaussian-process emulator to the evaluations seen so far and picking each
//! batch in two steps: one point by the upper-confidence-bound rule over a
//! large search set, the rest by pure exploration inside the region still
//! plausibly containing the maximum. Exploration points are ranked either by
//! predictive variance or by a mutual-information variance ratio over a
//! candidate grid.
//!
//! The numerical core is generic over the scalar type (`f64` by default,
//! `f32` supported); concrete aliases live at the crate root.

pub mod acquisition;
pub mod criteria;
pub mod error;
pub mod gp;
pub mod optimizer;
pub mod points;
pub mod sampling;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Points closer than this (Euclidean, unit-cube coordinates) to a previous
/// evaluation are treated as duplicates and never re-selected; this protects
/// the covariance factorization.
pub const DEDUP_TOLERANCE: f64 = 1e-10;

/// Candidate sets treat points within this distance as identical.
pub const CANDIDATE_DISTINCT_TOLERANCE: f64 = 1e-12;

// Concrete aliases for the default double-precision instantiation.
pub type GpModel64 = gp::GpModel<f64>;
pub type Prediction64 = gp::Prediction<f64>;
pub type KernelConfig64 = gp::KernelConfig<f64>;
pub type BoxDomain64 = sampling::BoxDomain<f64>;
pub type PointSet64 = points::PointSet<f64>;
pub type DesignSet64 = points::DesignSet<f64>;
pub type OptimizerConfig64 = optimizer::OptimizerConfig<f64>;
pub type TrialTrace64 = optimizer::TrialTrace<f64>;

// Single-precision aliases, mainly exercised by tests.
pub type GpModel32 = gp::GpModel<f32>;
pub type Prediction32 = gp::Prediction<f32>;
pub type BoxDomain32 = sampling::BoxDomain<f32>;
pub type PointSet32 = points::PointSet<f32>;
