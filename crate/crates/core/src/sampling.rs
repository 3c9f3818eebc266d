//! Space-filling input generation: maximin Latin hypercube designs for
//! initialization and plain Latin hypercube draws for large search sets.
//!
//! All functions take the caller's generator; campaigns own one generator
//! per trial, which keeps trials independent and reproducible.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::points::PointSet;
use crate::scalar::Scalar;

/// Axis-aligned box `[lower_i, upper_i]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain<S> {
    lower: Vec<S>,
    upper: Vec<S>,
}

impl<S: Scalar> BoxDomain<S> {
    pub fn new(lower: Vec<S>, upper: Vec<S>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::Config("domain bounds must be non-empty and equal length".into()));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !l.is_finite() || !u.is_finite() || *l >= *u {
                return Err(Error::Config(format!(
                    "domain bound {i} invalid: lower {} must be below upper {}",
                    l.to_f64(),
                    u.to_f64()
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The unit hypercube `[0, 1]^d`.
    pub fn unit(dim: usize) -> Self {
        Self { lower: vec![S::zero(); dim], upper: vec![S::one(); dim] }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[S] {
        &self.lower
    }

    pub fn upper(&self) -> &[S] {
        &self.upper
    }

    pub fn contains(&self, x: &[S], tol: S) -> bool {
        x.len() == self.dim()
            && x.iter().enumerate().all(|(i, &v)| {
                let margin = tol * (self.upper[i] - self.lower[i]);
                v >= self.lower[i] - margin && v <= self.upper[i] + margin
            })
    }
}

/// One Latin hypercube draw on the unit cube: every axis is split into `n`
/// strata and each stratum receives exactly one point.
fn lhs_unit<S: Scalar, R: Rng>(n: usize, d: usize, rng: &mut R) -> PointSet<S> {
    assert!(n >= 1 && d >= 1);
    let nf = S::of_usize(n);
    let mut data = vec![S::zero(); n * d];
    let mut strata: Vec<usize> = (0..n).collect();
    for k in 0..d {
        strata.shuffle(rng);
        for (i, &s) in strata.iter().enumerate() {
            let u: S = rng.random_range(S::zero()..S::one());
            data[i * d + k] = (S::of_usize(s) + u) / nf;
        }
    }
    PointSet::from_flat(data, d)
}

/// Best-of-`restarts` maximin Latin hypercube design on the unit cube.
///
/// Among `restarts` independent draws from the generator, returns the one
/// with the largest minimum pairwise distance. Deterministic for a fixed
/// generator state.
pub fn lhs_maximin<S: Scalar, R: Rng>(
    n: usize,
    d: usize,
    rng: &mut R,
    restarts: usize,
) -> PointSet<S> {
    let mut best = lhs_unit::<S, _>(n, d, rng);
    if n < 2 {
        return best;
    }
    let mut best_dist = best.min_pairwise_distance().unwrap();
    for _ in 1..restarts.max(1) {
        let cand = lhs_unit::<S, _>(n, d, rng);
        let dist = cand.min_pairwise_distance().unwrap();
        if dist > best_dist {
            best = cand;
            best_dist = dist;
        }
    }
    best
}

/// Samples `n` points inside `domain` with a single Latin hypercube draw
/// (no maximin restarts; search sets are large and resampled every
/// iteration). Each call advances the generator, so successive calls give
/// fresh sets.
pub fn sample_search_set<S: Scalar, R: Rng>(
    n: usize,
    domain: &BoxDomain<S>,
    rng: &mut R,
) -> PointSet<S> {
    let unit = lhs_unit::<S, _>(n, domain.dim(), rng);
    scale_to_domain(&unit, domain)
}

/// Affine map from the unit cube into `domain`.
///
/// Panics if any input coordinate lies outside `[0, 1]` (callers construct
/// unit points, so this is a contract violation rather than a data error).
pub fn scale_to_domain<S: Scalar>(unit_points: &PointSet<S>, domain: &BoxDomain<S>) -> PointSet<S> {
    let mut out = PointSet::empty(domain.dim());
    for row in unit_points.iter() {
        out.push(&scale_point(row, domain));
    }
    out
}

/// Single-point version of [`scale_to_domain`].
pub fn scale_point<S: Scalar>(unit: &[S], domain: &BoxDomain<S>) -> Vec<S> {
    assert_eq!(unit.len(), domain.dim(), "point dimension mismatch");
    let eps = S::of(1e-12);
    unit.iter()
        .enumerate()
        .map(|(i, &u)| {
            assert!(
                u >= -eps && u <= S::one() + eps,
                "coordinate {} = {} outside the unit box",
                i,
                u.to_f64()
            );
            domain.lower()[i] + u * (domain.upper()[i] - domain.lower()[i])
        })
        .collect()
}
