//! Sequential design-selection criteria over candidate sets.
//!
//! Three scores are provided: maximum predictive variance (ALM), integrated
//! variance reduction over a reference set (ALC), and a mutual-information
//! variance ratio (MICE). All of them condition on the training set plus any
//! pending batch points whose outputs are not known yet; predictive
//! variance depends only on input locations.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gp::GpModel;
use crate::points::{dist, PointSet};
use crate::scalar::Scalar;
use crate::CANDIDATE_DISTINCT_TOLERANCE;

/// Where a candidate set came from; informational only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    SearchSet,
    RelevantRegion,
}

/// Candidate points for selection, deduplicated on construction.
#[derive(Debug, Clone)]
pub struct CandidateSet<S> {
    points: PointSet<S>,
    provenance: Provenance,
}

impl<S: Scalar> CandidateSet<S> {
    /// Keeps the first of any group of points closer than the candidate
    /// distinctness tolerance.
    pub fn new(points: &PointSet<S>, provenance: Provenance) -> Self {
        let tol = S::of(CANDIDATE_DISTINCT_TOLERANCE);
        let mut deduped = PointSet::empty(points.dim());
        for p in points.iter() {
            if !deduped.contains_within(p, tol) {
                deduped.push(p);
            }
        }
        Self { points: deduped, provenance }
    }

    pub fn points(&self) -> &PointSet<S> {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }
}

/// Predictive variance at `x` given training ∪ pending: the ALM score.
pub fn alm_score<S: Scalar>(
    model: &GpModel<S>,
    pending: &PointSet<S>,
    x: &[S],
) -> Result<S> {
    model.augmented_variance(pending, x)
}

/// Mean variance reduction over `reference` from adding `x`: the ALC score.
pub fn alc_score<S: Scalar>(
    model: &GpModel<S>,
    pending: &PointSet<S>,
    x: &[S],
    reference: &PointSet<S>,
) -> Result<S> {
    if reference.is_empty() {
        return Err(Error::Config("ALC reference set must be non-empty".into()));
    }
    let before = model.augment(pending)?;
    let mut with_x = pending.clone();
    with_x.push(x);
    let after = model.augment(&with_x)?;
    let v_before = before.variances(reference);
    let v_after = after.variances(reference);
    let mut acc = S::zero();
    for (b, a) in v_before.iter().zip(&v_after) {
        acc += *b - *a;
    }
    Ok(acc / S::of_usize(reference.len()))
}

/// Denominator of the MICE ratio: the variance of `x` conditioned on the
/// unselected grid whose correlation matrix carries the nugget `tau2` on its
/// diagonal. In standardized (correlation) units.
fn nugget_conditional_variance<S: Scalar>(
    model: &GpModel<S>,
    x: &[S],
    unselected: &PointSet<S>,
    tau2: S,
) -> S {
    let m = unselected.len();
    let kernel = model.kernel();
    let mut mat = DMatrix::from_element(m, m, S::zero());
    for i in 0..m {
        mat[(i, i)] = S::one() + tau2;
        for j in (i + 1)..m {
            let v = kernel.correlation(unselected.point(i), unselected.point(j));
            mat[(i, j)] = v;
            mat[(j, i)] = v;
        }
    }
    let r = DVector::from_iterator(m, unselected.iter().map(|row| kernel.correlation(row, x)));
    // diag(1 + tau2) keeps this PD for any tau2 >= 0 short of exact duplicates
    let chol = nalgebra::linalg::Cholesky::new(mat)
        .expect("nugget-inflated correlation matrix is positive definite");
    let w = chol.solve(&r);
    S::one() + tau2 - r.dot(&w)
}

/// The MICE score: predictive variance of `x` under training ∪ pending,
/// divided by its variance conditioned on the not-yet-selected grid with a
/// diagonal nugget. The process variance multiplies numerator and
/// denominator alike, so the ratio is scale-free.
pub fn mice_score<S: Scalar>(
    model: &GpModel<S>,
    pending: &PointSet<S>,
    x: &[S],
    unselected: &CandidateSet<S>,
    tau2: S,
) -> Result<S> {
    debug_assert!(
        !unselected.points().contains_within(x, S::of(CANDIDATE_DISTINCT_TOLERANCE)),
        "caller must remove x from the unselected set"
    );
    if unselected.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let numerator = model.augmented_variance(pending, x)?;
    let denom_std = nugget_conditional_variance(model, x, unselected.points(), tau2);
    let denominator = model.process_variance() * denom_std;
    if denominator < S::of(1e-12) * model.process_variance() {
        return Err(Error::DegenerateDenominator {
            point: x.iter().map(|v| v.to_f64()).collect(),
            value: denominator.to_f64(),
        });
    }
    Ok(numerator / denominator)
}

/// MICE scores for every row of `candidates`, sharing one factorization.
///
/// Each candidate `x` is scored against the unselected set
/// `(grid ∖ {x}) ∪ pending`: the combined set is factorized once and the
/// conditional variance of a grid member given the rest is read off the
/// inverse diagonal. Results match per-candidate [`mice_score`] with the
/// same grid composition to numerical round-off.
pub fn mice_scores<S: Scalar>(
    model: &GpModel<S>,
    pending: &PointSet<S>,
    candidates: &PointSet<S>,
    grid: &PointSet<S>,
    tau2: S,
) -> Result<Vec<S>> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let tol = S::of(CANDIDATE_DISTINCT_TOLERANCE);
    let mut combined = PointSet::empty(grid.dim());
    for p in grid.iter().chain(pending.iter()) {
        if !combined.contains_within(p, tol) {
            combined.push(p);
        }
    }
    let m = combined.len();
    let kernel = model.kernel();
    let mut mat = DMatrix::from_element(m, m, S::zero());
    for i in 0..m {
        mat[(i, i)] = S::one() + tau2;
        for j in (i + 1)..m {
            let v = kernel.correlation(combined.point(i), combined.point(j));
            mat[(i, j)] = v;
            mat[(j, i)] = v;
        }
    }
    let chol = nalgebra::linalg::Cholesky::new(mat)
        .expect("nugget-inflated correlation matrix is positive definite");
    let inv = chol.inverse();

    let aug = model.augment(pending)?;
    let numerators = aug.variances(candidates);
    let pv = model.process_variance();

    let mut scores = Vec::with_capacity(candidates.len());
    for (idx, x) in candidates.iter().enumerate() {
        let member = (0..m).find(|&i| dist(combined.point(i), x) <= tol);
        let denom_std = match member {
            // conditional variance of member i given the rest of the grid
            Some(i) => S::one() / inv[(i, i)],
            None => {
                let r = DVector::from_iterator(
                    m,
                    combined.iter().map(|row| kernel.correlation(row, x)),
                );
                let w = chol.solve(&r);
                S::one() + tau2 - r.dot(&w)
            }
        };
        let denominator = pv * denom_std;
        if denominator < S::of(1e-12) * pv {
            return Err(Error::DegenerateDenominator {
                point: x.iter().map(|v| v.to_f64()).collect(),
                value: denominator.to_f64(),
            });
        }
        scores.push(numerators[idx] / denominator);
    }
    Ok(scores)
}

/// Which criterion [`select_best`] ranks candidates with.
#[derive(Debug, Clone, Copy)]
pub enum Criterion<'a, S> {
    /// ALM: maximize predictive variance.
    PredictiveVariance,
    /// ALC: maximize mean variance reduction over the reference set.
    IntegratedVarianceReduction { reference: &'a PointSet<S> },
    /// MICE: maximize the nugget-regularized variance ratio against
    /// `(grid ∖ candidate) ∪ pending`.
    MutualInformation { grid: &'a PointSet<S>, nugget: S },
}

/// A selected candidate with its score.
#[derive(Debug, Clone)]
pub struct Selection<S> {
    pub index: usize,
    pub point: Vec<S>,
    pub score: S,
}

/// Scores every candidate and returns the maximizer; ties break toward the
/// lowest candidate index.
pub fn select_best<S: Scalar>(
    model: &GpModel<S>,
    pending: &PointSet<S>,
    candidates: &CandidateSet<S>,
    criterion: &Criterion<'_, S>,
) -> Result<Selection<S>> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let scores = match criterion {
        Criterion::PredictiveVariance => {
            model.augment(pending)?.variances(candidates.points())
        }
        Criterion::IntegratedVarianceReduction { reference } => {
            let mut out = Vec::with_capacity(candidates.len());
            for x in candidates.points().iter() {
                out.push(alc_score(model, pending, x, reference)?);
            }
            out
        }
        Criterion::MutualInformation { grid, nugget } => {
            mice_scores(model, pending, candidates.points(), grid, *nugget)?
        }
    };
    let mut best = 0usize;
    for (i, s) in scores.iter().enumerate().skip(1) {
        if *s > scores[best] {
            best = i;
        }
    }
    Ok(Selection {
        index: best,
        point: candidates.points().point(best).to_vec(),
        score: scores[best],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::{GpModel, KernelConfig, KernelFamily};
    use crate::points::DesignSet;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn model_1d(xs: &[f64], ys: &[f64], l: f64) -> GpModel<f64> {
        let inputs = PointSet::from_rows(&xs.iter().map(|&x| vec![x]).collect::<Vec<_>>());
        let design = DesignSet::new(inputs, ys.to_vec());
        let kernel =
            KernelConfig::isotropic(KernelFamily::squared_exponential(), l, 1).unwrap();
        GpModel::with_hyperparameters(&design, kernel, None, Some(0.0)).unwrap()
    }

    fn grid_1d(xs: &[f64]) -> PointSet<f64> {
        PointSet::from_rows(&xs.iter().map(|&x| vec![x]).collect::<Vec<_>>())
    }

    #[test]
    fn alm_is_the_augmented_variance() {
        let model = model_1d(&[0.0, 1.0], &[0.0, 1.0], 0.3);
        let pending = grid_1d(&[0.2]);
        let x = [0.7];
        assert_eq!(
            alm_score(&model, &pending, &x).unwrap(),
            model.augmented_variance(&pending, &x).unwrap()
        );
        // zero at a training point with zero noise, no pending
        let at_train = alm_score(&model, &PointSet::empty(1), &[0.0]).unwrap();
        assert_abs_diff_eq!(at_train, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn alm_argmax_falls_in_the_largest_gap() {
        let model = model_1d(&[0.0, 0.2, 1.0], &[0.5, 0.1, -0.2], 0.05);
        let grid: Vec<f64> = (0..100).map(|i| i as f64 / 99.0).collect();
        let mut best = (0.0, f64::NEG_INFINITY);
        for &x in &grid {
            let s = alm_score(&model, &PointSet::empty(1), &[x]).unwrap();
            if s > best.1 {
                best = (x, s);
            }
        }
        // the largest gap is (0.2, 1.0); its midpoint region wins
        assert!(best.0 > 0.3 && best.0 < 0.9, "argmax {} outside the gap", best.0);
    }

    #[test]
    fn alc_is_zero_for_training_points_and_nonnegative() {
        let model = model_1d(&[0.0, 0.5, 1.0], &[0.0, 1.0, 0.0], 0.2);
        let reference = grid_1d(&[0.1, 0.3, 0.6, 0.9]);
        let none = PointSet::empty(1);
        let at_train = alc_score(&model, &none, &[0.5], &reference).unwrap();
        assert_abs_diff_eq!(at_train, 0.0, epsilon = 1e-9);
        for &x in &[0.15, 0.42, 0.77] {
            assert!(alc_score(&model, &none, &[x], &reference).unwrap() >= -1e-8);
        }
    }

    #[test]
    fn alc_on_its_own_point_reduces_to_alm() {
        let model = model_1d(&[0.0, 1.0], &[0.0, 1.0], 0.3);
        let none = PointSet::empty(1);
        let x = [0.4];
        let reference = grid_1d(&[0.4]);
        let alc = alc_score(&model, &none, &x, &reference).unwrap();
        let alm = alm_score(&model, &none, &x).unwrap();
        // conditioning on x leaves only the noise floor behind
        assert_relative_eq!(alc, alm, max_relative = 1e-6);
    }

    #[test]
    fn mice_far_unselected_grid_reduces_to_prior_ratio() {
        let model = model_1d(&[0.0, 1.0], &[0.0, 1.0], 0.05);
        let none = PointSet::empty(1);
        let x = [0.5];
        // unselected points far away: correlations to x effectively zero
        let unselected =
            CandidateSet::new(&grid_1d(&[40.0, 41.0, 42.0]), Provenance::SearchSet);
        let tau2 = 1.0;
        let score = mice_score(&model, &none, &x, &unselected, tau2).unwrap();
        let numerator = alm_score(&model, &none, &x).unwrap();
        let prior_denominator = model.process_variance() * (1.0 + tau2);
        assert_relative_eq!(score, numerator / prior_denominator, max_relative = 1e-6);
    }

    #[test]
    fn mice_is_invariant_to_process_variance_scaling() {
        let xs = [0.0, 0.35, 1.0];
        let ys = [0.0, 1.0, -0.5];
        let scaled: Vec<f64> = ys.iter().map(|y| y * 37.0).collect();
        let a = model_1d(&xs, &ys, 0.2);
        let b = model_1d(&xs, &scaled, 0.2);
        let unselected = CandidateSet::new(&grid_1d(&[0.1, 0.6, 0.8]), Provenance::SearchSet);
        let none = PointSet::empty(1);
        let sa = mice_score(&a, &none, &[0.5], &unselected, 1.0).unwrap();
        let sb = mice_score(&b, &none, &[0.5], &unselected, 1.0).unwrap();
        assert_relative_eq!(sa, sb, max_relative = 1e-9);
    }

    #[test]
    fn batch_scores_match_direct_scores() {
        let model = model_1d(&[0.0, 0.5, 1.0], &[0.2, -0.4, 0.9], 0.15);
        let pending = grid_1d(&[0.3]);
        let grid = grid_1d(&[0.1, 0.25, 0.45, 0.62, 0.8, 0.95]);
        let tau2 = 1.0;
        let batch = mice_scores(&model, &pending, &grid, &grid, tau2).unwrap();
        for (i, x) in grid.iter().enumerate() {
            // direct path: grid minus x, plus pending
            let mut rest = PointSet::empty(1);
            for (j, p) in grid.iter().enumerate() {
                if j != i {
                    rest.push(p);
                }
            }
            for p in pending.iter() {
                rest.push(p);
            }
            let unselected = CandidateSet::new(&rest, Provenance::SearchSet);
            let direct = mice_score(&model, &pending, x, &unselected, tau2).unwrap();
            assert_relative_eq!(batch[i], direct, max_relative = 1e-8);
        }
    }

    #[test]
    fn select_best_matches_exhaustive_scan_and_breaks_ties_low() {
        let model = model_1d(&[0.0, 1.0], &[0.0, 1.0], 0.25);
        let none = PointSet::empty(1);
        let pts = grid_1d(&(0..20).map(|i| 0.025 + i as f64 / 20.0).collect::<Vec<_>>());
        let candidates = CandidateSet::new(&pts, Provenance::SearchSet);
        let chosen =
            select_best(&model, &none, &candidates, &Criterion::PredictiveVariance).unwrap();
        let mut best = (0usize, f64::NEG_INFINITY);
        for (i, x) in pts.iter().enumerate() {
            let s = alm_score(&model, &none, x).unwrap();
            if s > best.1 {
                best = (i, s);
            }
        }
        assert_eq!(chosen.index, best.0);

        // a single candidate comes back regardless of score
        let single = CandidateSet::new(&grid_1d(&[0.0]), Provenance::SearchSet);
        assert_eq!(
            select_best(&model, &none, &single, &Criterion::PredictiveVariance)
                .unwrap()
                .index,
            0
        );
    }

    #[test]
    fn candidate_sets_deduplicate_on_construction() {
        let pts = grid_1d(&[0.3, 0.3 + 1e-14, 0.7, 0.3]);
        let set = CandidateSet::new(&pts, Provenance::SearchSet);
        assert_eq!(set.len(), 2);
        assert_eq!(set.points().point(0), &[0.3]);
        assert_eq!(set.points().point(1), &[0.7]);
    }

    #[test]
    fn equal_scores_select_the_first_candidate() {
        // candidates symmetric around the lone training point get
        // bitwise-equal variances; the tie must break to the lower index
        let model = model_1d(&[0.5], &[1.0], 0.2);
        let candidates = CandidateSet::new(&grid_1d(&[0.4, 0.6]), Provenance::SearchSet);
        let none = PointSet::empty(1);
        let a = alm_score(&model, &none, &[0.4]).unwrap();
        let b = alm_score(&model, &none, &[0.6]).unwrap();
        assert_eq!(a, b, "symmetric candidates should score identically");
        let pick =
            select_best(&model, &none, &candidates, &Criterion::PredictiveVariance).unwrap();
        assert_eq!(pick.index, 0);
    }

    #[test]
    fn degenerate_denominator_names_the_point() {
        // with no nugget, an unselected point sitting on top of x collapses
        // the conditional variance
        let model = model_1d(&[0.0, 1.0], &[0.0, 1.0], 0.3);
        let x = [0.5];
        let near_duplicate = 0.5 + 5e-12; // beyond dedup tolerance, within collapse
        let unselected =
            CandidateSet::new(&grid_1d(&[near_duplicate, 0.9]), Provenance::SearchSet);
        let err = mice_score(&model, &PointSet::empty(1), &x, &unselected, 0.0).unwrap_err();
        match err {
            Error::DegenerateDenominator { point, .. } => assert_eq!(point, vec![0.5]),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn empty_candidates_error() {
        let model = model_1d(&[0.0, 1.0], &[0.0, 1.0], 0.25);
        let empty = CandidateSet::new(&PointSet::empty(1), Provenance::SearchSet);
        assert!(matches!(
            select_best(&model, &PointSet::empty(1), &empty, &Criterion::PredictiveVariance),
            Err(Error::EmptyCandidates)
        ));
    }
}
