//! Gaussian-process regression: kernels, hyperparameter fitting and
//! predictive equations.

mod fit;
mod kernel;
mod model;

pub use fit::{fit, FitOptions};
pub use kernel::{kernel_correlation, KernelConfig, KernelFamily, MaternSmoothness};
pub use model::{
    AugmentedGp, GpModel, Prediction, DEFAULT_JITTER, MAX_JITTER, SIGMA2_FLOOR,
};
