//! Fitted emulator state and predictive equations.
//!
//! The model stores the training design, a validated kernel, the process
//! variance and a Cholesky factor of the jittered correlation matrix.
//! Predictions go through the stored factor; a dense inverse is never formed.
//!
//! Outputs are standardized (zero mean, unit variance) internally so the
//! zero-mean assumption is serviceable across wildly different output
//! ranges; predictions are de-standardized on the way out. Inputs are
//! expected in unit-hypercube coordinates when used with the rest of the
//! library. The math itself is coordinate-agnostic, but the default
//! lengthscale bounds are tuned for the unit cube.

use nalgebra::{DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::gp::kernel::KernelConfig;
use crate::points::{DesignSet, PointSet};
use crate::scalar::Scalar;
use crate::DEDUP_TOLERANCE;

/// First rung of the jitter ladder, relative to the process variance.
pub const DEFAULT_JITTER: f64 = 1e-8;
/// Last rung of the jitter ladder; factorization failures beyond this are
/// reported as errors.
pub const MAX_JITTER: f64 = 1e-2;
/// Floor for the estimated process variance (standardized units), reached
/// only for degenerate (e.g. constant) outputs.
pub const SIGMA2_FLOOR: f64 = 1e-12;

/// Gaussian predictive distribution at a single point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction<S> {
    pub mean: S,
    /// Non-negative; clamped to zero when round-off drives it slightly
    /// negative.
    pub variance: S,
}

impl<S: Scalar> Prediction<S> {
    pub fn sd(&self) -> S {
        self.variance.max(S::zero()).sqrt()
    }
}

/// A fitted Gaussian-process emulator.
///
/// Immutable once constructed; safe to share across threads for concurrent
/// prediction.
#[derive(Debug, Clone)]
pub struct GpModel<S: Scalar> {
    train_x: PointSet<S>,
    train_y: Vec<S>,
    kernel: KernelConfig<S>,
    y_shift: S,
    y_scale: S,
    sigma2_std: S,
    jitter: S,
    l_factor: DMatrix<S>,
    alpha: DVector<S>,
}

/// Cholesky-factorizes `r + jitter * I`, escalating the jitter tenfold up to
/// [`MAX_JITTER`] until the factorization succeeds.
pub(crate) fn factorize_with_ladder<S: Scalar>(
    r: &DMatrix<S>,
    start: S,
) -> Result<(nalgebra::linalg::Cholesky<S, Dyn>, S)> {
    let mut tried = Vec::new();
    let mut jitter = start;
    loop {
        let mut m = r.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += jitter;
        }
        if let Some(chol) = nalgebra::linalg::Cholesky::new(m) {
            return Ok((chol, jitter));
        }
        tried.push(jitter.to_f64());
        let next = if jitter <= S::zero() { S::of(DEFAULT_JITTER) } else { jitter * S::of(10.0) };
        if next.to_f64() > MAX_JITTER * (1.0 + 1e-12) {
            return Err(Error::Factorization { tried });
        }
        jitter = next;
    }
}

fn correlation_matrix<S: Scalar>(points: &PointSet<S>, kernel: &KernelConfig<S>) -> DMatrix<S> {
    let n = points.len();
    let mut r = DMatrix::from_element(n, n, S::zero());
    for i in 0..n {
        r[(i, i)] = S::one();
        for j in (i + 1)..n {
            let v = kernel.correlation(points.point(i), points.point(j));
            r[(i, j)] = v;
            r[(j, i)] = v;
        }
    }
    r
}

impl<S: Scalar> GpModel<S> {
    /// Builds a model with fixed hyperparameters.
    ///
    /// `sigma2` is the process variance in raw output units; `None` uses the
    /// profile maximum-likelihood estimate for the given kernel. `jitter` is
    /// the relative diagonal inflation; `None` starts the ladder at
    /// [`DEFAULT_JITTER`], while an explicit zero requests exact
    /// interpolation (escalating only if the factorization fails).
    pub fn with_hyperparameters(
        design: &DesignSet<S>,
        kernel: KernelConfig<S>,
        sigma2: Option<S>,
        jitter: Option<S>,
    ) -> Result<Self> {
        if design.is_empty() {
            return Err(Error::Config("design must contain at least one point".into()));
        }
        if design.dim() != kernel.dim() {
            return Err(Error::DimensionMismatch {
                expected: kernel.dim(),
                actual: design.dim(),
            });
        }
        let n = design.len();
        let nf = S::of_usize(n);

        let mut shift = S::zero();
        for &y in &design.outputs {
            shift += y;
        }
        shift /= nf;
        let mut var = S::zero();
        for &y in &design.outputs {
            let d = y - shift;
            var += d * d;
        }
        var /= nf;
        let scale = if var.to_f64() > 1e-24 { var.sqrt() } else { S::one() };

        let y_std = DVector::from_iterator(n, design.outputs.iter().map(|&y| (y - shift) / scale));

        let r = correlation_matrix(&design.inputs, &kernel);
        let (chol, jitter) = factorize_with_ladder(&r, jitter.unwrap_or(S::of(DEFAULT_JITTER)))?;
        let alpha = chol.solve(&y_std);

        let sigma2_std = match sigma2 {
            Some(s2) => s2 / (scale * scale),
            None => (y_std.dot(&alpha) / nf).max(S::of(SIGMA2_FLOOR)),
        };

        Ok(Self {
            train_x: design.inputs.clone(),
            train_y: design.outputs.clone(),
            kernel,
            y_shift: shift,
            y_scale: scale,
            sigma2_std,
            jitter,
            l_factor: chol.unpack(),
            alpha,
        })
    }

    pub fn training_inputs(&self) -> &PointSet<S> {
        &self.train_x
    }

    pub fn training_outputs(&self) -> &[S] {
        &self.train_y
    }

    pub fn kernel(&self) -> &KernelConfig<S> {
        &self.kernel
    }

    /// Process variance in raw output units.
    pub fn process_variance(&self) -> S {
        self.y_scale * self.y_scale * self.sigma2_std
    }

    /// Noise (jitter) variance in raw output units.
    pub fn noise_variance(&self) -> S {
        self.jitter * self.process_variance()
    }

    /// Relative diagonal inflation actually used by the factorization.
    pub fn jitter(&self) -> S {
        self.jitter
    }

    fn correlations_to(&self, x: &[S]) -> DVector<S> {
        DVector::from_iterator(
            self.train_x.len(),
            self.train_x.iter().map(|row| self.kernel.correlation(row, x)),
        )
    }

    /// Predictive mean and variance at `x`, computed through the stored
    /// factorization.
    pub fn predict(&self, x: &[S]) -> Prediction<S> {
        let r = self.correlations_to(x);
        let mean = self.y_shift + self.y_scale * r.dot(&self.alpha);
        let v = self
            .l_factor
            .solve_lower_triangular(&r)
            .expect("triangular factor is nonsingular");
        let variance =
            (self.process_variance() * (S::one() - v.norm_squared())).max(S::zero());
        Prediction { mean, variance }
    }

    /// Predictions for every row of `points`; one triangular solve over the
    /// whole block instead of a solve per point.
    pub fn predict_batch(&self, points: &PointSet<S>) -> Vec<Prediction<S>> {
        let n = self.train_x.len();
        let m = points.len();
        let ks = DMatrix::from_fn(n, m, |i, j| {
            self.kernel.correlation(self.train_x.point(i), points.point(j))
        });
        let means = ks.tr_mul(&self.alpha);
        let v = self
            .l_factor
            .solve_lower_triangular(&ks)
            .expect("triangular factor is nonsingular");
        let pv = self.process_variance();
        (0..m)
            .map(|j| Prediction {
                mean: self.y_shift + self.y_scale * means[j],
                variance: (pv * (S::one() - v.column(j).norm_squared())).max(S::zero()),
            })
            .collect()
    }

    /// Conditions the covariance on the training inputs plus `pending`
    /// locations whose outputs are not yet known. Pending points within
    /// [`DEDUP_TOLERANCE`] of the training set (or of each other) are
    /// dropped.
    pub fn augment(&self, pending: &PointSet<S>) -> Result<AugmentedGp<'_, S>> {
        let tol = S::of(DEDUP_TOLERANCE);
        let mut points = self.train_x.clone();
        for p in pending.iter() {
            if !points.contains_within(p, tol) {
                points.push(p);
            }
        }
        let r = correlation_matrix(&points, &self.kernel);
        let (chol, _) = factorize_with_ladder(&r, self.jitter)?;
        Ok(AugmentedGp { base: self, points, l_factor: chol.unpack() })
    }

    /// Predictive variance at `x` conditioned on training and `pending`
    /// inputs. Equals `predict(x).variance` when `pending` is empty.
    pub fn augmented_variance(&self, pending: &PointSet<S>, x: &[S]) -> Result<S> {
        Ok(self.augment(pending)?.variance(x))
    }

    /// Log marginal likelihood of the stored hyperparameters.
    pub fn log_marginal_likelihood(&self) -> S {
        let n = self.train_x.len();
        let nf = S::of_usize(n);
        let y_std = DVector::from_iterator(
            n,
            self.train_y.iter().map(|&y| (y - self.y_shift) / self.y_scale),
        );
        let mut log_det = S::zero();
        for i in 0..n {
            log_det += self.l_factor[(i, i)].ln();
        }
        log_det *= S::of(2.0);
        let quad = y_std.dot(&self.alpha) / self.sigma2_std;
        let two_pi = S::of(2.0) * S::pi();
        -S::of(0.5) * (quad + nf * self.sigma2_std.ln() + log_det + nf * two_pi.ln())
    }
}

/// Variance-only view of a model conditioned on extra input locations.
///
/// The factorization over training ∪ pending is computed once, so scoring
/// many query points against the same pending set stays cheap.
#[derive(Debug)]
pub struct AugmentedGp<'a, S: Scalar> {
    base: &'a GpModel<S>,
    points: PointSet<S>,
    l_factor: DMatrix<S>,
}

impl<S: Scalar> AugmentedGp<'_, S> {
    /// The conditioning set: training inputs followed by deduplicated
    /// pending points.
    pub fn points(&self) -> &PointSet<S> {
        &self.points
    }

    pub fn variance(&self, x: &[S]) -> S {
        let r = DVector::from_iterator(
            self.points.len(),
            self.points.iter().map(|row| self.base.kernel.correlation(row, x)),
        );
        let v = self
            .l_factor
            .solve_lower_triangular(&r)
            .expect("triangular factor is nonsingular");
        (self.base.process_variance() * (S::one() - v.norm_squared())).max(S::zero())
    }

    /// Variances for every row of `queries` via one block solve.
    pub fn variances(&self, queries: &PointSet<S>) -> Vec<S> {
        let n = self.points.len();
        let m = queries.len();
        let ks = DMatrix::from_fn(n, m, |i, j| {
            self.base.kernel.correlation(self.points.point(i), queries.point(j))
        });
        let v = self
            .l_factor
            .solve_lower_triangular(&ks)
            .expect("triangular factor is nonsingular");
        let pv = self.base.process_variance();
        (0..m)
            .map(|j| (pv * (S::one() - v.column(j).norm_squared())).max(S::zero()))
            .collect()
    }
}
