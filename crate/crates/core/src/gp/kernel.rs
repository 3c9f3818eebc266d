//! Stationary correlation functions for the emulator.
//!
//! Both kernels are separable: the correlation is a product of
//! one-dimensional terms, each driven by the per-coordinate distance
//! `|x_i - x'_i|` and its own lengthscale.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Matérn smoothness orders with closed-form correlations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaternSmoothness {
    /// ν = 3/2: once-differentiable sample paths.
    ThreeHalves,
    /// ν = 5/2: twice-differentiable sample paths.
    FiveHalves,
}

/// Kernel family together with its fixed shape parameter.
///
/// Lengthscales are estimated during fitting and live in [`KernelConfig`];
/// the power `p` and the smoothness ν are configuration, not estimated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelFamily<S> {
    PowerExponential { power: S },
    Matern { smoothness: MaternSmoothness },
}

impl<S: Scalar> KernelFamily<S> {
    /// Squared-exponential special case, the default choice.
    pub fn squared_exponential() -> Self {
        KernelFamily::PowerExponential { power: S::of(2.0) }
    }

    fn validate(&self) -> Result<()> {
        if let KernelFamily::PowerExponential { power } = self {
            if !(*power > S::zero() && *power <= S::of(2.0)) {
                return Err(Error::KernelConfig(format!(
                    "power must lie in (0, 2], got {}",
                    power.to_f64()
                )));
            }
        }
        Ok(())
    }
}

/// A validated kernel: family plus strictly positive per-dimension
/// lengthscales.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelConfig<S> {
    family: KernelFamily<S>,
    lengthscales: Vec<S>,
}

impl<S: Scalar> KernelConfig<S> {
    pub fn new(family: KernelFamily<S>, lengthscales: Vec<S>) -> Result<Self> {
        family.validate()?;
        if lengthscales.is_empty() {
            return Err(Error::KernelConfig("at least one lengthscale required".into()));
        }
        if let Some(l) = lengthscales.iter().find(|l| !l.is_finite() || **l <= S::zero()) {
            return Err(Error::KernelConfig(format!(
                "lengthscales must be strictly positive, got {}",
                l.to_f64()
            )));
        }
        Ok(Self { family, lengthscales })
    }

    /// Isotropic configuration: the same lengthscale in every dimension.
    pub fn isotropic(family: KernelFamily<S>, lengthscale: S, dim: usize) -> Result<Self> {
        Self::new(family, vec![lengthscale; dim])
    }

    pub fn family(&self) -> &KernelFamily<S> {
        &self.family
    }

    pub fn lengthscales(&self) -> &[S] {
        &self.lengthscales
    }

    pub fn dim(&self) -> usize {
        self.lengthscales.len()
    }

    /// Correlation between two points, in (0, 1].
    ///
    /// Equals 1 at zero distance and decreases strictly in every coordinate
    /// distance. Panics in debug builds on dimension mismatch; use
    /// [`kernel_correlation`] for the checked entry point.
    pub fn correlation(&self, x: &[S], x2: &[S]) -> S {
        debug_assert_eq!(x.len(), self.lengthscales.len());
        debug_assert_eq!(x2.len(), self.lengthscales.len());
        match self.family {
            KernelFamily::PowerExponential { power } => {
                let mut exponent = S::zero();
                if power == S::of(2.0) {
                    for ((&a, &b), &l) in x.iter().zip(x2).zip(&self.lengthscales) {
                        let d = a - b;
                        exponent += d * d / l;
                    }
                } else {
                    for ((&a, &b), &l) in x.iter().zip(x2).zip(&self.lengthscales) {
                        exponent += (a - b).abs().powf(power) / l;
                    }
                }
                (-exponent).exp()
            }
            KernelFamily::Matern { smoothness } => {
                let mut prod = S::one();
                for ((&a, &b), &l) in x.iter().zip(x2).zip(&self.lengthscales) {
                    let r = (a - b).abs() / l;
                    prod *= match smoothness {
                        MaternSmoothness::ThreeHalves => {
                            let t = S::of(3.0).sqrt() * r;
                            (S::one() + t) * (-t).exp()
                        }
                        MaternSmoothness::FiveHalves => {
                            let t = S::of(5.0).sqrt() * r;
                            (S::one() + t + t * t / S::of(3.0)) * (-t).exp()
                        }
                    };
                }
                prod
            }
        }
    }
}

/// Checked correlation evaluation: validates the dimension of both arguments
/// against the configured lengthscales.
pub fn kernel_correlation<S: Scalar>(x: &[S], x2: &[S], cfg: &KernelConfig<S>) -> Result<S> {
    if x.len() != cfg.dim() {
        return Err(Error::DimensionMismatch { expected: cfg.dim(), actual: x.len() });
    }
    if x2.len() != cfg.dim() {
        return Err(Error::DimensionMismatch { expected: cfg.dim(), actual: x2.len() });
    }
    Ok(cfg.correlation(x, x2))
}
