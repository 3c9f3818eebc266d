//! Per-trial and per-group performance metrics: simple-regret curves,
//! evaluations-to-target, and group summaries.

use std::fmt;
use std::str::FromStr;

use optimice_core::TrialTrace64;

/// Simple regret per evaluation: `f_star - best_so_far`, clamped at zero
/// when an observed value exceeds the stored optimum within tolerance.
pub fn simple_regret_curve(trace: &TrialTrace64, f_star: f64) -> Vec<f64> {
    trace.evaluations.iter().map(|e| (f_star - e.best_so_far).max(0.0)).collect()
}

/// 1-based index of the first evaluation whose value reaches `target`;
/// `None` when the budget runs out first.
pub fn evals_to_target(trace: &TrialTrace64, target: f64) -> Option<usize> {
    trace.evaluations.iter().position(|e| e.value >= target).map(|i| i + 1)
}

/// Metrics of a single completed trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSummary {
    pub best_solution: f64,
    pub evals_to_1pct: Option<usize>,
    pub evals_to_5pct: Option<usize>,
    /// Simple regret per evaluation (clamped, non-increasing).
    pub regret_curve: Vec<f64>,
    /// Best-so-far per evaluation, kept for the mean-curve outputs.
    pub best_curve: Vec<f64>,
}

pub fn summarize_trial(
    trace: &TrialTrace64,
    f_star: f64,
    target_1pct: f64,
    target_5pct: f64,
) -> TrialSummary {
    TrialSummary {
        best_solution: trace.best_solution(),
        evals_to_1pct: evals_to_target(trace, target_1pct),
        evals_to_5pct: evals_to_target(trace, target_5pct),
        regret_curve: simple_regret_curve(trace, f_star),
        best_curve: trace.evaluations.iter().map(|e| e.best_so_far).collect(),
    }
}

/// Mean evaluations to a target among successful trials, or the budget when
/// no trial succeeded. Prints as `39.5` or `102+`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeanEvals {
    Among(f64),
    BudgetExceeded(usize),
}

impl fmt::Display for MeanEvals {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeanEvals::Among(v) => write!(f, "{v}"),
            MeanEvals::BudgetExceeded(budget) => write!(f, "{budget}+"),
        }
    }
}

impl FromStr for MeanEvals {
    type Err = std::num::ParseFloatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(stripped) = s.strip_suffix('+') {
            let budget: f64 = stripped.parse()?;
            Ok(MeanEvals::BudgetExceeded(budget as usize))
        } else {
            Ok(MeanEvals::Among(s.parse()?))
        }
    }
}

/// One row of the campaign summary: all trials of one (function, variant)
/// pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub function: String,
    pub variant: String,
    pub n_trials: usize,
    pub success_1pct: usize,
    pub success_5pct: usize,
    pub mean_evals_1pct: MeanEvals,
    pub mean_evals_5pct: MeanEvals,
    pub best: f64,
    pub mean_best: f64,
    pub sd_best: f64,
}

fn mean_among(successes: impl Iterator<Item = Option<usize>>, budget: usize) -> MeanEvals {
    let hits: Vec<usize> = successes.flatten().collect();
    if hits.is_empty() {
        MeanEvals::BudgetExceeded(budget)
    } else {
        MeanEvals::Among(hits.iter().sum::<usize>() as f64 / hits.len() as f64)
    }
}

/// Aggregates trial summaries. Mean evaluations average over successful
/// trials only, which is the only interpretation compatible with rows where
/// no trial succeeds.
pub fn summarize_group(
    function: &str,
    variant: &str,
    budget: usize,
    trials: &[TrialSummary],
) -> SummaryRow {
    assert!(!trials.is_empty(), "at least one trial required");
    let n = trials.len();
    let bests: Vec<f64> = trials.iter().map(|t| t.best_solution).collect();
    let mean_best = bests.iter().sum::<f64>() / n as f64;
    let sd_best = if n > 1 {
        let ss: f64 = bests.iter().map(|b| (b - mean_best) * (b - mean_best)).sum();
        (ss / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    SummaryRow {
        function: function.to_string(),
        variant: variant.to_string(),
        n_trials: n,
        success_1pct: trials.iter().filter(|t| t.evals_to_1pct.is_some()).count(),
        success_5pct: trials.iter().filter(|t| t.evals_to_5pct.is_some()).count(),
        mean_evals_1pct: mean_among(trials.iter().map(|t| t.evals_to_1pct), budget),
        mean_evals_5pct: mean_among(trials.iter().map(|t| t.evals_to_5pct), budget),
        best: bests.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean_best,
        sd_best,
    }
}

/// Mean regret curves across trials, for plotting.
///
/// Returns `(mean_simple_regret, regret_of_mean_solution)` per evaluation
/// index: the mean of the per-trial regrets, and the regret of the mean
/// best-so-far. These differ in general; both are emitted since plotting
/// conventions disagree on which one to show.
pub fn mean_regret_curves(trials: &[TrialSummary], f_star: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(!trials.is_empty());
    let len = trials.iter().map(|t| t.regret_curve.len()).min().unwrap_or(0);
    let n = trials.len() as f64;
    let mut mean_regret = Vec::with_capacity(len);
    let mut regret_of_mean = Vec::with_capacity(len);
    for i in 0..len {
        let mr = trials.iter().map(|t| t.regret_curve[i]).sum::<f64>() / n;
        let mb = trials.iter().map(|t| t.best_curve[i]).sum::<f64>() / n;
        mean_regret.push(mr);
        regret_of_mean.push((f_star - mb).max(0.0));
    }
    (mean_regret, regret_of_mean)
}
