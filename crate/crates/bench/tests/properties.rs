//! Standalone property suite: stratification, trace accounting, regret
//! monotonicity, region membership of exploration points, and byte-level
//! determinism of the campaign outputs. The whole file runs in well under
//! two minutes.

use std::fs;

use optimice_bench::campaign::{run_campaign, run_trial, CampaignConfig, OptimizerSettings};
use optimice_bench::functions::{lookup, make_scaled};
use optimice_bench::metrics::simple_regret_curve;
use optimice_core::acquisition::region_from_predictions;
use optimice_core::gp::{GpModel, KernelConfig, KernelFamily};
use optimice_core::optimizer::{select_batch, OptimizerConfig, SelectionTag};
use optimice_core::points::{DesignSet, PointSet};
use optimice_core::sampling::lhs_maximin;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_settings() -> OptimizerSettings {
    let mut settings = OptimizerSettings::mice();
    settings.iterations = Some(3);
    settings.batch_size = Some(3);
    settings.n_search = Some(400);
    settings.n_cand = Some(20);
    settings.fit_starts = Some(2);
    settings
}

#[test]
fn lhs_stratification() {
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 2 + (seed as usize % 15);
        let d = 1 + (seed as usize % 4);
        let pts = lhs_maximin::<f64, _>(n, d, &mut rng, 5);
        for k in 0..d {
            let mut strata: Vec<usize> = pts
                .iter()
                .map(|p| ((p[k] * n as f64).floor() as usize).min(n - 1))
                .collect();
            strata.sort_unstable();
            assert_eq!(strata, (0..n).collect::<Vec<_>>(), "seed {seed} axis {k}");
        }
    }
}

#[test]
fn trace_length_law() {
    let problem = make_scaled(lookup("E1").unwrap(), 1.0, 1.0).unwrap();
    for (iterations, batch_size, seed) in [(0usize, 5usize, 1u64), (3, 3, 2), (4, 1, 3)] {
        let mut settings = small_settings();
        settings.iterations = Some(iterations);
        settings.batch_size = Some(batch_size);
        let trace = run_trial(&problem, &settings, seed).unwrap();
        assert_eq!(trace.len(), 2 + iterations * batch_size);
        for t in 1..=iterations {
            let batch = trace.batch(t);
            assert_eq!(batch.iter().filter(|e| e.tag == SelectionTag::Ucb).count(), 1);
            assert_eq!(
                batch.iter().filter(|e| e.tag == SelectionTag::Pe).count(),
                batch_size - 1
            );
        }
    }
}

#[test]
fn regret_curves_are_non_increasing() {
    for label in ["E1", "E4", "E9"] {
        let problem = make_scaled(lookup(label).unwrap(), 1.0, 1.0).unwrap();
        let trace = run_trial(&problem, &small_settings(), 11).unwrap();
        let curve = simple_regret_curve(&trace, problem.global_optimum());
        for (i, w) in curve.windows(2).enumerate() {
            assert!(w[1] <= w[0], "{label}: regret increased at {i}");
        }
        assert!(curve.iter().all(|r| *r >= 0.0));
    }
}

#[test]
fn pe_points_are_relevant_region_members() {
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 6;
        let xs: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)])
            .collect();
        let ys: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let kernel =
            KernelConfig::isotropic(KernelFamily::squared_exponential(), 0.2, 2).unwrap();
        let model = GpModel::with_hyperparameters(
            &DesignSet::new(PointSet::from_rows(&xs), ys),
            kernel,
            None,
            None,
        )
        .unwrap();

        let mut config = OptimizerConfig::new(KernelFamily::squared_exponential(), seed);
        config.batch_size = 4;
        config.n_cand = 15;
        config.n_search = 300;
        let search = lhs_maximin::<f64, _>(config.n_search, 2, &mut rng, 1);

        let mut select_rng = ChaCha8Rng::seed_from_u64(seed + 1000);
        let batch = select_batch(&model, &search, &config, 1, &mut select_rng).unwrap();
        if batch.region_exhausted {
            continue;
        }
        // replay the region; selection consumed the rng but not the preds
        let preds = model.predict_batch(&search);
        let beta = config.beta.value(1, search.len());
        let region = region_from_predictions(&preds, beta);
        let members: Vec<&[f64]> =
            region.member_indices.iter().map(|&i| search.point(i)).collect();
        for (slot, point) in batch.points.iter().enumerate().skip(1) {
            assert!(
                members.contains(&point),
                "seed {seed}: PE slot {slot} not a region member"
            );
        }
    }
}

#[test]
fn identical_seeds_give_byte_identical_trials_csv() {
    let base = tempfile::tempdir().unwrap();
    let make_config = |dir: &std::path::Path| CampaignConfig {
        functions: vec!["E1".into()],
        optimizers: vec![small_settings()],
        n_trials: 2,
        seed_base: 99,
        output_dir: dir.to_path_buf(),
    };
    let a = run_campaign(&make_config(&base.path().join("a"))).unwrap();
    let b = run_campaign(&make_config(&base.path().join("b"))).unwrap();
    let bytes_a = fs::read(&a.trials_csv).unwrap();
    let bytes_b = fs::read(&b.trials_csv).unwrap();
    assert!(!bytes_a.is_empty());
    assert_eq!(bytes_a, bytes_b, "trials.csv differs between identical runs");
    let summary_a = fs::read(&a.summary_csv).unwrap();
    let summary_b = fs::read(&b.summary_csv).unwrap();
    assert_eq!(summary_a, summary_b);
}

#[test]
fn summary_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let config = CampaignConfig {
        functions: vec!["E1".into()],
        optimizers: vec![small_settings()],
        n_trials: 2,
        seed_base: 5,
        output_dir: dir.path().to_path_buf(),
    };
    let outcome = run_campaign(&config).unwrap();
    let parsed = optimice_bench::campaign::read_summary_csv(&outcome.summary_csv).unwrap();
    assert_eq!(parsed, outcome.summary);
}
