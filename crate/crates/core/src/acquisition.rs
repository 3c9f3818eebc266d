//! Acquisition functions and confidence-region machinery.
//!
//! Probability of improvement and expected improvement measure a candidate
//! against the incumbent plus a trade-off margin; the UCB rule ranks points
//! by mean plus `sqrt(beta)` standard deviations. The relevant region keeps
//! the search points whose upper bound still clears the best lower bound,
//! i.e. the locations that can plausibly hold the maximum.

use crate::gp::{GpModel, Prediction};
use crate::points::PointSet;
use crate::scalar::Scalar;

/// Confidence interval at one point for a given trade-off parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceBounds<S> {
    pub upper: S,
    pub lower: S,
    pub beta: S,
}

/// `mean ± sqrt(beta) * sd`.
pub fn confidence_bounds<S: Scalar>(pred: &Prediction<S>, beta: S) -> ConfidenceBounds<S> {
    let half_width = beta.max(S::zero()).sqrt() * pred.sd();
    ConfidenceBounds { upper: pred.mean + half_width, lower: pred.mean - half_width, beta }
}

/// Trade-off parameter schedule.
///
/// The growing schedule follows the standard finite-set rule
/// `beta_t = 2 ln(N t^2 pi^2 / (6 delta))`; a constant override is available
/// for experimentation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaSchedule<S> {
    Adaptive { delta: S },
    Constant { value: S },
}

impl<S: Scalar> BetaSchedule<S> {
    pub fn value(&self, t: usize, search_size: usize) -> S {
        match *self {
            BetaSchedule::Adaptive { delta } => beta_schedule(t, delta, search_size),
            BetaSchedule::Constant { value } => value,
        }
    }
}

impl<S: Scalar> Default for BetaSchedule<S> {
    fn default() -> Self {
        BetaSchedule::Adaptive { delta: S::of(0.1) }
    }
}

/// The default growing schedule; `t` is the 1-based iteration index.
pub fn beta_schedule<S: Scalar>(t: usize, delta: S, search_size: usize) -> S {
    assert!(t >= 1, "iterations are 1-based");
    let tf = S::of_usize(t);
    let nf = S::of_usize(search_size);
    let pi2 = S::pi() * S::pi();
    S::of(2.0) * (nf * tf * tf * pi2 / (S::of(6.0) * delta)).ln()
}

fn normal_cdf<S: Scalar>(z: S) -> S {
    S::of(0.5 * statrs::function::erf::erfc(-z.to_f64() / std::f64::consts::SQRT_2))
}

fn normal_pdf<S: Scalar>(z: S) -> S {
    (-z * z / S::of(2.0)).exp() / (S::of(2.0) * S::pi()).sqrt()
}

/// Probability that the candidate improves on `incumbent` by at least
/// `beta`. Degenerate (zero-variance) predictions collapse to an indicator.
pub fn probability_of_improvement<S: Scalar>(
    pred: &Prediction<S>,
    incumbent: S,
    beta: S,
) -> S {
    let sd = pred.sd();
    let margin = pred.mean - incumbent - beta;
    if sd > S::zero() {
        normal_cdf(margin / sd)
    } else if margin > S::zero() {
        S::one()
    } else {
        S::zero()
    }
}

/// Expected improvement over `incumbent + beta`; non-negative.
pub fn expected_improvement<S: Scalar>(pred: &Prediction<S>, incumbent: S, beta: S) -> S {
    let sd = pred.sd();
    let margin = pred.mean - incumbent - beta;
    if sd > S::zero() {
        let z = margin / sd;
        (margin * normal_cdf(z) + sd * normal_pdf(z)).max(S::zero())
    } else {
        margin.max(S::zero())
    }
}

/// Index of the prediction maximizing the upper confidence bound; ties break
/// toward the lowest index.
pub fn ucb_from_predictions<S: Scalar>(preds: &[Prediction<S>], beta: S) -> usize {
    assert!(!preds.is_empty(), "search set must be non-empty");
    let mut best = 0usize;
    let mut best_val = confidence_bounds(&preds[0], beta).upper;
    for (i, p) in preds.iter().enumerate().skip(1) {
        let u = confidence_bounds(p, beta).upper;
        if u > best_val {
            best = i;
            best_val = u;
        }
    }
    best
}

/// UCB rule over a search set: returns the maximizing index and point.
pub fn ucb_select<S: Scalar>(
    model: &GpModel<S>,
    search_points: &PointSet<S>,
    beta: S,
) -> (usize, Vec<S>) {
    let preds = model.predict_batch(search_points);
    let idx = ucb_from_predictions(&preds, beta);
    (idx, search_points.point(idx).to_vec())
}

/// Search-set indices that may still contain the maximum.
#[derive(Debug, Clone)]
pub struct RelevantRegion<S> {
    /// Indices into the search set whose upper bound reaches `y_bullet`.
    pub member_indices: Vec<usize>,
    /// The best lower confidence bound: a high-probability floor on the
    /// maximum.
    pub y_bullet: S,
}

/// Region construction from precomputed predictions.
pub fn region_from_predictions<S: Scalar>(
    preds: &[Prediction<S>],
    beta: S,
) -> RelevantRegion<S> {
    assert!(!preds.is_empty(), "search set must be non-empty");
    let bounds: Vec<ConfidenceBounds<S>> =
        preds.iter().map(|p| confidence_bounds(p, beta)).collect();
    let y_bullet = bounds
        .iter()
        .map(|b| b.lower)
        .fold(S::of(f64::NEG_INFINITY), |acc, v| acc.max(v));
    let member_indices =
        bounds.iter().enumerate().filter(|(_, b)| b.upper >= y_bullet).map(|(i, _)| i).collect();
    RelevantRegion { member_indices, y_bullet }
}

/// Search points whose upper bound clears the best lower bound. Never empty:
/// the index attaining the best lower bound is always a member.
pub fn relevant_region<S: Scalar>(
    model: &GpModel<S>,
    search_points: &PointSet<S>,
    beta: S,
) -> RelevantRegion<S> {
    region_from_predictions(&model.predict_batch(search_points), beta)
}
