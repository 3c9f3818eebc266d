//! Multi-trial campaign runner and machine-readable outputs.
//!
//! A campaign is a grid of (function, optimizer settings, trial) jobs; each
//! trial owns a derived seed (`seed_base + trial`), so the matrix is
//! reproducible and trials run in parallel. Outputs are written atomically:
//! `trials.csv` (every evaluation), `summary.csv` (one row per function and
//! variant), `regret.csv` (mean regret curves, long format) and
//! `manifest.json` (config hash, seeds, version, aborts, notes).

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use optimice_core::acquisition::BetaSchedule;
use optimice_core::gp::{KernelFamily, MaternSmoothness};
use optimice_core::optimizer::ExploreVariant;
use optimice_core::{OptimizerConfig64, TrialTrace64};

use crate::error::{BenchError, Result};
use crate::functions::{lookup, make_scaled, ScaledFunction};
use crate::metrics::{
    mean_regret_curves, summarize_group, summarize_trial, SummaryRow, TrialSummary,
};

/// Override for the number of worker threads.
pub const WORKERS_ENV: &str = "OPTIMICE_WORKERS";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BetaSettings {
    Adaptive { delta: f64 },
    Constant { value: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelSettings {
    PowerExponential { power: f64 },
    /// `smoothness` is `"3/2"` or `"5/2"`.
    Matern { smoothness: String },
}

/// One optimizer configuration of the campaign grid. Unset fields fall back
/// to the published per-dimension protocol: iterations 20/30/40/50/60 and
/// candidate-set sizes 50/100/150/200/250 for dimensions 2 through 6, two
/// initial points, batches of five, and a search set of 10^4. The `alm`
/// variant scores the whole search set, i.e. its candidate count defaults
/// to `n_search`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSettings {
    /// `"mice"` or `"alm"`.
    pub variant: String,
    /// Summary label; defaults to the variant name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_init: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_search: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_cand: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nugget: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<BetaSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mice_grid_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_starts: Option<usize>,
}

impl OptimizerSettings {
    pub fn mice() -> Self {
        Self::with_variant("mice")
    }

    pub fn alm() -> Self {
        Self::with_variant("alm")
    }

    fn with_variant(variant: &str) -> Self {
        Self {
            variant: variant.to_string(),
            label: None,
            n_init: None,
            iterations: None,
            batch_size: None,
            n_search: None,
            n_cand: None,
            nugget: None,
            beta: None,
            kernel: None,
            mice_grid_cap: None,
            fit_starts: None,
        }
    }

    pub fn display_label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.variant.clone())
    }

    fn explore_variant(&self) -> Result<ExploreVariant> {
        match self.variant.to_ascii_lowercase().as_str() {
            "mice" => Ok(ExploreVariant::Mice),
            "alm" => Ok(ExploreVariant::Alm),
            other => Err(BenchError::Config(format!(
                "unknown variant {other:?}; expected \"mice\" or \"alm\""
            ))),
        }
    }

    fn default_iterations(dim: usize) -> usize {
        match dim {
            0..=2 => 20,
            3 => 30,
            4 => 40,
            5 => 50,
            _ => 60,
        }
    }

    fn default_n_cand(dim: usize) -> usize {
        match dim {
            0..=2 => 50,
            3 => 100,
            4 => 150,
            5 => 200,
            _ => 250,
        }
    }

    /// Resolves the settings into a core configuration for a problem of the
    /// given dimension.
    pub fn to_config(&self, dim: usize, seed: u64) -> Result<OptimizerConfig64> {
        let kernel = match &self.kernel {
            None => KernelFamily::squared_exponential(),
            Some(KernelSettings::PowerExponential { power }) => {
                KernelFamily::PowerExponential { power: *power }
            }
            Some(KernelSettings::Matern { smoothness }) => {
                let smoothness = match smoothness.as_str() {
                    "3/2" => MaternSmoothness::ThreeHalves,
                    "5/2" => MaternSmoothness::FiveHalves,
                    other => {
                        return Err(BenchError::Config(format!(
                            "unknown smoothness {other:?}; expected \"3/2\" or \"5/2\""
                        )))
                    }
                };
                KernelFamily::Matern { smoothness }
            }
        };
        let mut config = OptimizerConfig64::new(kernel, seed);
        config.explore_variant = self.explore_variant()?;
        config.n_init = self.n_init.unwrap_or(2);
        config.iterations = self.iterations.unwrap_or_else(|| Self::default_iterations(dim));
        config.batch_size = self.batch_size.unwrap_or(5);
        config.n_search = self.n_search.unwrap_or(10_000);
        config.n_cand = self.n_cand.unwrap_or(match config.explore_variant {
            ExploreVariant::Mice => Self::default_n_cand(dim),
            ExploreVariant::Alm => config.n_search,
        });
        if let Some(nugget) = self.nugget {
            config.nugget = nugget;
        }
        if let Some(beta) = &self.beta {
            config.beta = match *beta {
                BetaSettings::Adaptive { delta } => BetaSchedule::Adaptive { delta },
                BetaSettings::Constant { value } => BetaSchedule::Constant { value },
            };
        }
        if let Some(cap) = self.mice_grid_cap {
            config.mice_grid_cap = cap;
        }
        if let Some(starts) = self.fit_starts {
            config.fit.n_starts = starts;
        }
        config.validate()?;
        Ok(config)
    }
}

/// A campaign: functions × optimizer settings × trials.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    /// Function labels (`E1`) or names (`Branin`).
    pub functions: Vec<String>,
    /// Optimizer settings grid; one summary row per (function, settings).
    pub optimizers: Vec<OptimizerSettings>,
    pub n_trials: usize,
    /// Trial `i` runs with seed `seed_base + i`.
    pub seed_base: u64,
    pub output_dir: PathBuf,
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        if self.optimizers.is_empty() {
            return Err(BenchError::Config("campaign needs at least one optimizer".into()));
        }
        if self.n_trials < 1 {
            return Err(BenchError::Config("n_trials must be at least 1".into()));
        }
        Ok(())
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.n_trials).map(|i| self.seed_base + i as u64).collect()
    }
}

/// Runs a single trial of a problem under the given settings.
pub fn run_trial(
    problem: &ScaledFunction,
    settings: &OptimizerSettings,
    seed: u64,
) -> Result<TrialTrace64> {
    let config = settings.to_config(problem.dim(), seed)?;
    let objective =
        |x: &[f64]| problem.evaluate(x).expect("the optimizer stays inside the domain");
    Ok(optimice_core::optimizer::run(objective, problem.domain(), &config)?)
}

/// A completed (or aborted) cell of the campaign matrix.
struct TrialOutcome {
    problem_idx: usize,
    settings_idx: usize,
    trial: usize,
    result: Result<TrialTrace64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AbortRecord {
    pub function: String,
    pub variant: String,
    pub trial: usize,
    pub error: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config_hash: String,
    pub seed_base: u64,
    pub seeds: Vec<u64>,
    pub functions: Vec<String>,
    pub variants: Vec<String>,
    pub aborted: Vec<AbortRecord>,
    pub notes: Vec<String>,
}

/// Campaign results: summary rows plus the paths written.
pub struct CampaignOutcome {
    pub summary: Vec<SummaryRow>,
    pub aborted: Vec<AbortRecord>,
    pub trials_csv: PathBuf,
    pub summary_csv: PathBuf,
    pub regret_csv: PathBuf,
    pub manifest_path: PathBuf,
}

fn thread_pool() -> rayon::ThreadPool {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var(WORKERS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        builder = builder.num_threads(n.max(1));
    }
    builder.build().expect("worker pool")
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn config_hash(config: &CampaignConfig) -> Result<String> {
    let canonical = serde_json::to_vec(config)?;
    Ok(hex::encode(Sha256::digest(&canonical)))
}

/// Runs the whole campaign matrix and writes all artifacts into
/// `output_dir`. Aborted trials are recorded and skipped by the summaries;
/// the campaign itself keeps going.
pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignOutcome> {
    let problems: Vec<ScaledFunction> = config
        .functions
        .iter()
        .map(|key| {
            lookup(key)
                .ok_or_else(|| BenchError::UnknownFunction(key.clone()))
                .and_then(|f| make_scaled(f, 1.0, 1.0))
        })
        .collect::<Result<_>>()?;
    run_campaign_on(&problems, config)
}

/// [`run_campaign`] over explicit (possibly scaled) problems; the config's
/// `functions` field is ignored in favor of `problems`.
pub fn run_campaign_on(
    problems: &[ScaledFunction],
    config: &CampaignConfig,
) -> Result<CampaignOutcome> {
    config.validate()?;
    if problems.is_empty() {
        return Err(BenchError::Config("campaign needs at least one problem".into()));
    }
    let seeds = config.seeds();

    let mut jobs = Vec::new();
    for (problem_idx, _) in problems.iter().enumerate() {
        for (settings_idx, _) in config.optimizers.iter().enumerate() {
            for (trial, &seed) in seeds.iter().enumerate() {
                jobs.push((problem_idx, settings_idx, trial, seed));
            }
        }
    }

    let pool = thread_pool();
    let outcomes: Vec<TrialOutcome> = pool.install(|| {
        jobs.par_iter()
            .map(|&(problem_idx, settings_idx, trial, seed)| TrialOutcome {
                problem_idx,
                settings_idx,
                trial,
                result: run_trial(&problems[problem_idx], &config.optimizers[settings_idx], seed),
            })
            .collect()
    });

    fs::create_dir_all(&config.output_dir)?;

    let mut aborted = Vec::new();
    let mut summary = Vec::new();
    let mut regret_rows: Vec<(String, String, usize, f64, f64)> = Vec::new();

    for (problem_idx, problem) in problems.iter().enumerate() {
        for (settings_idx, settings) in config.optimizers.iter().enumerate() {
            let mut trials: Vec<TrialSummary> = Vec::new();
            let mut budget = 0usize;
            for outcome in outcomes.iter().filter(|o| {
                o.problem_idx == problem_idx && o.settings_idx == settings_idx
            }) {
                match &outcome.result {
                    Ok(trace) => {
                        budget = budget.max(trace.len());
                        let (t1, t5) = problem.targets();
                        trials.push(summarize_trial(trace, problem.global_optimum(), t1, t5));
                    }
                    Err(err) => aborted.push(AbortRecord {
                        function: problem.label(),
                        variant: settings.display_label(),
                        trial: outcome.trial,
                        error: err.to_string(),
                    }),
                }
            }
            if trials.is_empty() {
                continue;
            }
            let row = summarize_group(
                &problem.label(),
                &settings.display_label(),
                budget,
                &trials,
            );
            summary.push(row);
            let (mean_regret, regret_of_mean) =
                mean_regret_curves(&trials, problem.global_optimum());
            for (i, (mr, rm)) in mean_regret.iter().zip(&regret_of_mean).enumerate() {
                regret_rows.push((
                    problem.label(),
                    settings.display_label(),
                    i + 1,
                    *mr,
                    *rm,
                ));
            }
        }
    }

    let trials_csv = config.output_dir.join("trials.csv");
    write_trials_csv(&trials_csv, config, problems, &outcomes)?;

    let summary_csv = config.output_dir.join("summary.csv");
    write_summary_csv(&summary_csv, &summary)?;

    let regret_csv = config.output_dir.join("regret.csv");
    write_regret_csv(&regret_csv, &regret_rows)?;

    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config_hash(config)?,
        seed_base: config.seed_base,
        seeds,
        functions: problems.iter().map(|p| p.label()).collect(),
        variants: config.optimizers.iter().map(|s| s.display_label()).collect(),
        aborted: aborted.clone(),
        notes: Vec::new(),
    };
    let manifest_path = config.output_dir.join("manifest.json");
    write_atomic(&manifest_path, &serde_json::to_vec_pretty(&manifest)?)?;

    Ok(CampaignOutcome {
        summary,
        aborted,
        trials_csv,
        summary_csv,
        regret_csv,
        manifest_path,
    })
}

/// Rewrites the manifest with the given notes, e.g. the outcome of a
/// variant-ordering check.
pub fn amend_manifest_notes(manifest_path: &Path, notes: &[String]) -> Result<()> {
    let raw = fs::read(manifest_path)?;
    let mut manifest: Manifest = serde_json::from_slice(&raw)?;
    manifest.notes = notes.to_vec();
    write_atomic(manifest_path, &serde_json::to_vec_pretty(&manifest)?)?;
    Ok(())
}

fn write_trials_csv(
    path: &Path,
    config: &CampaignConfig,
    problems: &[ScaledFunction],
    outcomes: &[TrialOutcome],
) -> Result<()> {
    let max_dim = problems.iter().map(ScaledFunction::dim).max().unwrap_or(1);
    let mut writer = csv::Writer::from_writer(Vec::new());

    let mut header = vec![
        "function".to_string(),
        "variant".to_string(),
        "trial".to_string(),
        "iteration".to_string(),
        "slot".to_string(),
        "eval_index".to_string(),
    ];
    for i in 0..max_dim {
        header.push(format!("x_{i}"));
    }
    header.extend(
        ["y", "best_so_far", "simple_regret", "selection_tag", "region_size", "region_exhausted"]
            .map(str::to_string),
    );
    writer.write_record(&header)?;

    for outcome in outcomes {
        let Ok(trace) = &outcome.result else { continue };
        let problem = &problems[outcome.problem_idx];
        let settings = &config.optimizers[outcome.settings_idx];
        let f_star = problem.global_optimum();
        for (i, e) in trace.evaluations.iter().enumerate() {
            let mut record = vec![
                problem.label(),
                settings.display_label(),
                outcome.trial.to_string(),
                e.iteration.to_string(),
                e.slot.to_string(),
                (i + 1).to_string(),
            ];
            for k in 0..max_dim {
                record.push(e.point.get(k).map(f64::to_string).unwrap_or_default());
            }
            let (region_size, region_exhausted) = if e.iteration == 0 {
                (0, false)
            } else {
                let rec = trace.iterations[e.iteration - 1];
                (rec.region_size, rec.region_exhausted)
            };
            record.push(e.value.to_string());
            record.push(e.best_so_far.to_string());
            record.push((f_star - e.best_so_far).max(0.0).to_string());
            record.push(e.tag.as_str().to_string());
            record.push(region_size.to_string());
            record.push(region_exhausted.to_string());
            writer.write_record(&record)?;
        }
    }
    let bytes = writer.into_inner().map_err(|e| BenchError::Config(e.to_string()))?;
    write_atomic(path, &bytes)
}

fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record([
        "function",
        "variant",
        "n_trials",
        "success_1pct",
        "success_5pct",
        "mean_evals_1pct",
        "mean_evals_5pct",
        "best",
        "mean_best",
        "sd_best",
    ])?;
    for row in rows {
        writer.write_record([
            row.function.clone(),
            row.variant.clone(),
            row.n_trials.to_string(),
            row.success_1pct.to_string(),
            row.success_5pct.to_string(),
            row.mean_evals_1pct.to_string(),
            row.mean_evals_5pct.to_string(),
            row.best.to_string(),
            row.mean_best.to_string(),
            row.sd_best.to_string(),
        ])?;
    }
    let bytes = writer.into_inner().map_err(|e| BenchError::Config(e.to_string()))?;
    write_atomic(path, &bytes)
}

fn write_regret_csv(
    path: &Path,
    rows: &[(String, String, usize, f64, f64)],
) -> Result<()> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record([
        "function",
        "variant",
        "eval_index",
        "mean_simple_regret",
        "regret_of_mean_solution",
    ])?;
    for (function, variant, idx, mean_regret, regret_of_mean) in rows {
        writer.write_record([
            function.clone(),
            variant.clone(),
            idx.to_string(),
            mean_regret.to_string(),
            regret_of_mean.to_string(),
        ])?;
    }
    let bytes = writer.into_inner().map_err(|e| BenchError::Config(e.to_string()))?;
    write_atomic(path, &bytes)
}

/// Parses a summary CSV back into rows (round-trip check and downstream
/// tooling).
pub fn read_summary_csv(path: &Path) -> Result<Vec<SummaryRow>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let r = record?;
        rows.push(SummaryRow {
            function: r[0].to_string(),
            variant: r[1].to_string(),
            n_trials: r[2].parse().map_err(|e| BenchError::Config(format!("{e}")))?,
            success_1pct: r[3].parse().map_err(|e| BenchError::Config(format!("{e}")))?,
            success_5pct: r[4].parse().map_err(|e| BenchError::Config(format!("{e}")))?,
            mean_evals_1pct: r[5].parse().map_err(|e| BenchError::Config(format!("{e}")))?,
            mean_evals_5pct: r[6].parse().map_err(|e| BenchError::Config(format!("{e}")))?,
            best: r[7].parse().map_err(|e| BenchError::Config(format!("{e}")))?,
            mean_best: r[8].parse().map_err(|e| BenchError::Config(format!("{e}")))?,
            sd_best: r[9].parse().map_err(|e| BenchError::Config(format!("{e}")))?,
        });
    }
    Ok(rows)
}

/// A settings-sweep grid: scenarios × scaled versions of one function.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuneGrid {
    pub scenarios: Vec<OptimizerSettings>,
    /// Scaled versions to sweep; empty means the identity scaling only.
    #[serde(default)]
    pub scalings: Vec<ScalingSpec>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct ScalingSpec {
    pub vertical: f64,
    pub horizontal: f64,
}

/// One row of the tune sweep output.
#[derive(Debug, Clone)]
pub struct TuneRow {
    pub scenario: usize,
    pub settings: OptimizerSettings,
    pub scaling: ScalingSpec,
    pub summary: SummaryRow,
}

/// Runs a settings sweep over scaled versions of one function and writes
/// `tune.csv` into `output_dir`.
pub fn run_tune(
    function_key: &str,
    grid: &TuneGrid,
    n_trials: usize,
    seed_base: u64,
    output_dir: &Path,
) -> Result<Vec<TuneRow>> {
    let base = lookup(function_key)
        .ok_or_else(|| BenchError::UnknownFunction(function_key.to_string()))?;
    if grid.scenarios.is_empty() {
        return Err(BenchError::Config("tune grid has no scenarios".into()));
    }
    let scalings = if grid.scalings.is_empty() {
        vec![ScalingSpec { vertical: 1.0, horizontal: 1.0 }]
    } else {
        grid.scalings.clone()
    };
    let problems: Vec<ScaledFunction> = scalings
        .iter()
        .map(|s| make_scaled(base, s.vertical, s.horizontal))
        .collect::<Result<_>>()?;

    let mut jobs = Vec::new();
    for scenario in 0..grid.scenarios.len() {
        for (scaling_idx, _) in problems.iter().enumerate() {
            for trial in 0..n_trials {
                jobs.push((scenario, scaling_idx, trial, seed_base + trial as u64));
            }
        }
    }
    let pool = thread_pool();
    let outcomes: Vec<(usize, usize, usize, Result<TrialTrace64>)> = pool.install(|| {
        jobs.par_iter()
            .map(|&(scenario, scaling_idx, trial, seed)| {
                let result =
                    run_trial(&problems[scaling_idx], &grid.scenarios[scenario], seed);
                (scenario, scaling_idx, trial, result)
            })
            .collect()
    });

    let mut rows = Vec::new();
    for (scenario, settings) in grid.scenarios.iter().enumerate() {
        for (scaling_idx, problem) in problems.iter().enumerate() {
            let mut trials = Vec::new();
            let mut budget = 0usize;
            for (_, _, _, result) in outcomes
                .iter()
                .filter(|(sc, sl, _, _)| *sc == scenario && *sl == scaling_idx)
            {
                if let Ok(trace) = result {
                    budget = budget.max(trace.len());
                    let (t1, t5) = problem.targets();
                    trials.push(summarize_trial(trace, problem.global_optimum(), t1, t5));
                }
            }
            if trials.is_empty() {
                continue;
            }
            rows.push(TuneRow {
                scenario,
                settings: settings.clone(),
                scaling: scalings[scaling_idx],
                summary: summarize_group(
                    &problem.label(),
                    &settings.display_label(),
                    budget,
                    &trials,
                ),
            });
        }
    }

    fs::create_dir_all(output_dir)?;
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record([
        "scenario",
        "function",
        "iterations",
        "batch_size",
        "n_search",
        "n_cand",
        "vertical",
        "horizontal",
        "success_5pct",
        "mean_evals_5pct",
        "best",
        "mean_best",
        "sd_best",
    ])?;
    for row in &rows {
        let dim = base.dim();
        let resolved = row.settings.to_config(dim, 0)?;
        writer.write_record([
            row.scenario.to_string(),
            row.summary.function.clone(),
            resolved.iterations.to_string(),
            resolved.batch_size.to_string(),
            resolved.n_search.to_string(),
            resolved.n_cand.to_string(),
            row.scaling.vertical.to_string(),
            row.scaling.horizontal.to_string(),
            row.summary.success_5pct.to_string(),
            row.summary.mean_evals_5pct.to_string(),
            row.summary.best.to_string(),
            row.summary.mean_best.to_string(),
            row.summary.sd_best.to_string(),
        ])?;
    }
    let bytes = writer.into_inner().map_err(|e| BenchError::Config(e.to_string()))?;
    write_atomic(&output_dir.join("tune.csv"), &bytes)?;
    Ok(rows)
}
