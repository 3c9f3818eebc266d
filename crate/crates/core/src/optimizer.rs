//! The batch optimization loop.
//!
//! Each iteration refits the emulator, samples a fresh search set, and picks
//! a batch of `K` points: the first by the UCB rule over the whole search
//! set, the remaining `K - 1` greedily by a pure-exploration criterion over
//! a candidate subset of the relevant region. Batch outputs are then
//! evaluated (concurrently) and appended to the design.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::acquisition::{confidence_bounds, region_from_predictions, BetaSchedule};
use crate::criteria::{mice_scores, CandidateSet, Provenance};
use crate::error::{Error, Result};
use crate::gp::{fit, FitOptions, GpModel, KernelFamily};
use crate::points::{DesignSet, PointSet};
use crate::sampling::{lhs_maximin, sample_search_set, scale_to_domain, BoxDomain};
use crate::scalar::Scalar;
use crate::DEDUP_TOLERANCE;

/// Criterion used for the pure-exploration batch slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExploreVariant {
    /// Mutual-information variance ratio over the candidate grid.
    Mice,
    /// Plain maximum predictive variance.
    Alm,
}

/// All knobs of one optimization trial.
#[derive(Debug, Clone)]
pub struct OptimizerConfig<S> {
    /// Size of the initial space-filling design.
    pub n_init: usize,
    /// Number of batch iterations after the initial design.
    pub iterations: usize,
    /// Points evaluated per iteration.
    pub batch_size: usize,
    /// Size of the search set resampled every iteration.
    pub n_search: usize,
    /// Size of the candidate subset examined by the exploration criterion.
    pub n_cand: usize,
    /// Nugget for the mutual-information denominator.
    pub nugget: S,
    pub beta: BetaSchedule<S>,
    pub kernel: KernelFamily<S>,
    pub explore_variant: ExploreVariant,
    pub seed: u64,
    /// Cap on the conditioning grid of the mutual-information denominator;
    /// larger candidate sets are subsampled to this size.
    pub mice_grid_cap: usize,
    /// Maximin restarts for the initial design.
    pub lhs_restarts: usize,
    pub fit: FitOptions<S>,
}

impl<S: Scalar> OptimizerConfig<S> {
    pub fn new(kernel: KernelFamily<S>, seed: u64) -> Self {
        Self {
            n_init: 2,
            iterations: 20,
            batch_size: 5,
            n_search: 10_000,
            n_cand: 50,
            nugget: S::one(),
            beta: BetaSchedule::default(),
            kernel,
            explore_variant: ExploreVariant::Mice,
            seed,
            mice_grid_cap: 200,
            lhs_restarts: 100,
            fit: FitOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_init < 1 || self.batch_size < 1 || self.n_search < 1 || self.n_cand < 1 {
            return Err(Error::Config("all design sizes must be at least 1".into()));
        }
        if self.n_cand > self.n_search {
            return Err(Error::Config(format!(
                "n_cand {} exceeds n_search {}",
                self.n_cand, self.n_search
            )));
        }
        if self.nugget < S::zero() {
            return Err(Error::Config("nugget must be non-negative".into()));
        }
        Ok(())
    }
}

/// How an evaluation point was selected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionTag {
    Init,
    Ucb,
    Pe,
}

impl SelectionTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            SelectionTag::Init => "init",
            SelectionTag::Ucb => "ucb",
            SelectionTag::Pe => "pe",
        }
    }
}

/// One objective evaluation in a trial, in evaluation order.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation<S> {
    /// 0 for the initial design, then the 1-based batch iteration.
    pub iteration: usize,
    /// Position within the initial design or batch, 0-based.
    pub slot: usize,
    /// Domain (not unit-cube) coordinates.
    pub point: Vec<S>,
    pub value: S,
    /// Running maximum of all values up to and including this one.
    pub best_so_far: S,
    pub tag: SelectionTag,
}

/// Per-iteration bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IterationRecord {
    /// Cardinality of the relevant region in the iteration's search set.
    pub region_size: usize,
    /// Set when the candidate pool ran dry and slots were filled by maximum
    /// variance over the full search set.
    pub region_exhausted: bool,
}

/// Complete record of one optimization trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialTrace<S> {
    pub evaluations: Vec<Evaluation<S>>,
    pub iterations: Vec<IterationRecord>,
    pub n_init: usize,
    pub batch_size: usize,
}

impl<S: Scalar> TrialTrace<S> {
    pub fn len(&self) -> usize {
        self.evaluations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.evaluations.is_empty()
    }

    /// Best objective value observed over the whole trial.
    pub fn best_solution(&self) -> S {
        self.evaluations.last().map(|e| e.best_so_far).unwrap_or_else(|| S::of(f64::NAN))
    }

    /// Evaluations of one batch iteration (1-based), in slot order.
    pub fn batch(&self, t: usize) -> &[Evaluation<S>] {
        let start = self.n_init + (t - 1) * self.batch_size;
        &self.evaluations[start..start + self.batch_size]
    }
}

/// A selected batch before evaluation. Points are in the coordinates of the
/// search set handed to [`select_batch`].
#[derive(Debug, Clone)]
pub struct Batch<S> {
    pub points: PointSet<S>,
    pub tags: Vec<SelectionTag>,
    pub region_size: usize,
    pub region_exhausted: bool,
}

fn argmax<S: Scalar>(scores: &[S]) -> usize {
    let mut best = 0usize;
    for (i, s) in scores.iter().enumerate().skip(1) {
        if *s > scores[best] {
            best = i;
        }
    }
    best
}

/// Argmax skipping excluded indices; falls back to the plain argmax when
/// everything is excluded so the batch budget stays exact.
fn argmax_excluding<S: Scalar>(scores: &[S], excluded: impl Fn(usize) -> bool) -> usize {
    let mut best: Option<usize> = None;
    for (i, s) in scores.iter().enumerate() {
        if excluded(i) {
            continue;
        }
        if best.is_none_or(|b| *s > scores[b]) {
            best = Some(i);
        }
    }
    best.unwrap_or_else(|| argmax(scores))
}

/// Maximum-variance point over the full search set, avoiding duplicates of
/// the training inputs and the batch selected so far.
fn fallback_max_variance_point<S: Scalar>(
    model: &GpModel<S>,
    batch: &PointSet<S>,
    search: &PointSet<S>,
) -> Result<Vec<S>> {
    let tol = S::of(DEDUP_TOLERANCE);
    let vars = model.augment(batch)?.variances(search);
    let train = model.training_inputs();
    let idx = argmax_excluding(&vars, |i| {
        train.contains_within(search.point(i), tol) || batch.contains_within(search.point(i), tol)
    });
    Ok(search.point(idx).to_vec())
}

/// Selects one batch: slot 0 by UCB over the search set, the rest greedily
/// by the configured exploration criterion over a candidate subset of the
/// relevant region.
pub fn select_batch<S: Scalar, R: Rng>(
    model: &GpModel<S>,
    search: &PointSet<S>,
    config: &OptimizerConfig<S>,
    t: usize,
    rng: &mut R,
) -> Result<Batch<S>> {
    let tol = S::of(DEDUP_TOLERANCE);
    let train = model.training_inputs();
    let preds = model.predict_batch(search);
    let beta = config.beta.value(t, search.len());

    let uppers: Vec<S> = preds.iter().map(|p| confidence_bounds(p, beta).upper).collect();
    let ucb_idx = argmax_excluding(&uppers, |i| train.contains_within(search.point(i), tol));

    let mut batch = PointSet::empty(search.dim());
    batch.push(search.point(ucb_idx));
    let mut tags = vec![SelectionTag::Ucb];

    let region = region_from_predictions(&preds, beta);
    let region_size = region.member_indices.len();
    let mut region_exhausted = false;

    if config.batch_size > 1 {
        // candidates: region members that are not the UCB pick and do not
        // duplicate a training input
        let eligible: Vec<usize> = region
            .member_indices
            .iter()
            .copied()
            .filter(|&i| i != ucb_idx && !train.contains_within(search.point(i), tol))
            .collect();
        let subset: Vec<usize> = if eligible.len() > config.n_cand {
            let mut picks =
                rand::seq::index::sample(rng, eligible.len(), config.n_cand).into_vec();
            picks.sort_unstable();
            picks.into_iter().map(|i| eligible[i]).collect()
        } else {
            eligible
        };
        let mut cand_points = PointSet::empty(search.dim());
        for &i in &subset {
            cand_points.push(search.point(i));
        }
        let candidates = CandidateSet::new(&cand_points, Provenance::RelevantRegion);

        // conditioning grid for the mutual-information denominator
        let grid = if config.explore_variant == ExploreVariant::Mice
            && candidates.len() > config.mice_grid_cap
        {
            let mut picks =
                rand::seq::index::sample(rng, candidates.len(), config.mice_grid_cap).into_vec();
            picks.sort_unstable();
            let mut g = PointSet::empty(search.dim());
            for &i in &picks {
                g.push(candidates.points().point(i));
            }
            g
        } else {
            candidates.points().clone()
        };

        let mut chosen = vec![false; candidates.len()];
        for _ in 1..config.batch_size {
            let mut active_idx = Vec::new();
            let mut active_pts = PointSet::empty(search.dim());
            for (i, taken) in chosen.iter().enumerate() {
                if *taken {
                    continue;
                }
                let p = candidates.points().point(i);
                if batch.contains_within(p, tol) {
                    continue;
                }
                active_idx.push(i);
                active_pts.push(p);
            }

            let pick = if active_idx.is_empty() {
                region_exhausted = true;
                fallback_max_variance_point(model, &batch, search)?
            } else {
                let scores = match config.explore_variant {
                    ExploreVariant::Alm => model.augment(&batch)?.variances(&active_pts),
                    ExploreVariant::Mice => {
                        mice_scores(model, &batch, &active_pts, &grid, config.nugget)?
                    }
                };
                let local = argmax(&scores);
                chosen[active_idx[local]] = true;
                active_pts.point(local).to_vec()
            };
            batch.push(&pick);
            tags.push(SelectionTag::Pe);
        }
    }

    Ok(Batch { points: batch, tags, region_size, region_exhausted })
}

/// Evaluates every row of `points` concurrently and returns values in row
/// order; a non-finite value aborts with the offending point.
fn evaluate_batch<S, F>(objective: &F, points: &PointSet<S>) -> Result<Vec<S>>
where
    S: Scalar,
    F: Fn(&[S]) -> S + Sync,
{
    let values: Vec<S> = std::thread::scope(|scope| {
        let handles: Vec<_> =
            points.iter().map(|p| scope.spawn(move || objective(p))).collect();
        handles.into_iter().map(|h| h.join().expect("objective panicked")).collect()
    });
    for (p, &v) in points.iter().zip(&values) {
        if !v.is_finite() {
            return Err(Error::NonFiniteObjective {
                point: p.iter().map(|c| c.to_f64()).collect(),
                value: v.to_f64(),
            });
        }
    }
    Ok(values)
}

/// Runs one optimization trial: an initial maximin design followed by
/// `iterations` batches of `batch_size` evaluations.
///
/// The trace is deterministic for a fixed config (including the seed) even
/// though batch evaluations run concurrently: values are collected in slot
/// order and the generator is only consumed by sampling and selection.
pub fn run<S, F>(
    objective: F,
    domain: &BoxDomain<S>,
    config: &OptimizerConfig<S>,
) -> Result<TrialTrace<S>>
where
    S: Scalar,
    F: Fn(&[S]) -> S + Sync,
{
    config.validate()?;
    let d = domain.dim();
    let unit = BoxDomain::unit(d);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let init_unit = lhs_maximin::<S, _>(config.n_init, d, &mut rng, config.lhs_restarts);
    let init_domain = scale_to_domain(&init_unit, domain);
    let init_values = evaluate_batch(&objective, &init_domain)?;

    let mut trace = TrialTrace {
        evaluations: Vec::with_capacity(config.n_init + config.iterations * config.batch_size),
        iterations: Vec::with_capacity(config.iterations),
        n_init: config.n_init,
        batch_size: config.batch_size,
    };
    let mut best = S::of(f64::NEG_INFINITY);
    for (slot, (point, &value)) in init_domain.iter().zip(&init_values).enumerate() {
        best = best.max(value);
        trace.evaluations.push(Evaluation {
            iteration: 0,
            slot,
            point: point.to_vec(),
            value,
            best_so_far: best,
            tag: SelectionTag::Init,
        });
    }

    let mut design = DesignSet::new(init_unit, init_values);

    for t in 1..=config.iterations {
        let mut fit_opts = config.fit.clone();
        fit_opts.seed = config.seed ^ (t as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let model = fit(&design, config.kernel, &fit_opts)?;

        let search = sample_search_set(config.n_search, &unit, &mut rng);
        let batch = select_batch(&model, &search, config, t, &mut rng)?;
        let batch_domain = scale_to_domain(&batch.points, domain);
        let values = evaluate_batch(&objective, &batch_domain)?;

        trace.iterations.push(IterationRecord {
            region_size: batch.region_size,
            region_exhausted: batch.region_exhausted,
        });
        for (slot, (&value, tag)) in values.iter().zip(&batch.tags).enumerate() {
            best = best.max(value);
            trace.evaluations.push(Evaluation {
                iteration: t,
                slot,
                point: batch_domain.point(slot).to_vec(),
                value,
                best_so_far: best,
                tag: *tag,
            });
            design.push(batch.points.point(slot), value);
        }
    }

    Ok(trace)
}
