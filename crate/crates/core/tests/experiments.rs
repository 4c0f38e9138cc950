mod common;

use asgc_core::data::make_splits;
use asgc_core::experiments::{
    aggregate, combo_search, k_sweep, run_method, run_trials, train_and_score, trial_seed,
    ExperimentConfig, ExternalBaselines, FilteredFeatures, Method, TrialResult,
};
use asgc_core::filters::{simplex_grid, ComboWeights};
use asgc_core::numeric::{accuracy, fit_logistic};
use asgc_core::Error;
use common::planted_dataset;
use proptest::prelude::*;

fn result(dataset: &str, method: Method, trial: usize, acc: f64) -> TrialResult {
    TrialResult {
        dataset: dataset.into(),
        method,
        k_hops: 2,
        trial,
        seed: trial as u64,
        test_accuracy: acc,
        validation_accuracy: None,
        chosen_weights: None,
    }
}

#[test]
fn raw_method_is_plain_logistic_regression() {
    let ds = planted_dataset("raw", 200, 3, 6, true, 2.0, 1);
    let config = ExperimentConfig::default();
    let features = FilteredFeatures::compute(&ds, 2, config.rank_tol).unwrap();
    let split = make_splits(ds.n_nodes(), 9).unwrap();
    let r = run_method(&ds, &split, Method::Raw, &features, &config).unwrap();

    let fit_rows = split.train_and_validation();
    let model = fit_logistic(
        &ds.features().select_rows(&fit_rows),
        &ds.labels_at(&fit_rows),
        &config.logistic,
    )
    .unwrap();
    let predicted = model
        .predict(&ds.features().select_rows(&split.test))
        .unwrap();
    let want = accuracy(&predicted, &ds.labels_at(&split.test)).unwrap();
    assert_eq!(r.test_accuracy, want);
    assert!(want > 0.9, "features alone separate the classes: {want}");
}

#[test]
fn sgc1_equals_sgc_at_one_hop() {
    let ds = planted_dataset("s1", 150, 2, 4, true, 0.8, 2);
    let config = ExperimentConfig::default();
    let at_six = FilteredFeatures::compute(&ds, 6, config.rank_tol).unwrap();
    let at_one = FilteredFeatures::compute(&ds, 1, config.rank_tol).unwrap();
    for seed in 0..4 {
        let split = make_splits(ds.n_nodes(), seed).unwrap();
        let a = run_method(&ds, &split, Method::Sgc1, &at_six, &config).unwrap();
        let b = run_method(&ds, &split, Method::Sgc, &at_one, &config).unwrap();
        assert_eq!(a.test_accuracy, b.test_accuracy);
        assert_eq!(a.k_hops, 1);
    }
}

#[test]
fn identical_inputs_collapse_to_the_first_corner() {
    let ds = planted_dataset("c", 120, 2, 3, false, 1.0, 3);
    let config = ExperimentConfig {
        resolution: 1,
        ..ExperimentConfig::default()
    };
    let split = make_splits(ds.n_nodes(), 4).unwrap();
    let x = ds.features();
    let outcome = combo_search(&ds, &split, x, x, x, &config).unwrap();
    assert_eq!(outcome.candidates.len(), 3);
    assert_eq!(outcome.weights, ComboWeights::new(0, 0, 1, 1).unwrap());
    let (_, asgc_like) = train_and_score(
        x,
        ds.labels(),
        &split.train_and_validation(),
        &split.test,
        &config.logistic,
    )
    .unwrap();
    assert_eq!(outcome.test_accuracy, asgc_like);
}

#[test]
fn combo_corner_matches_retrained_asgc() {
    let ds = planted_dataset("corner", 150, 2, 4, false, 0.6, 8);
    let config = ExperimentConfig::default();
    let features = FilteredFeatures::compute(&ds, 3, config.rank_tol).unwrap();
    for seed in 0..6 {
        let split = make_splits(ds.n_nodes(), seed).unwrap();
        let outcome = combo_search(
            &ds,
            &split,
            ds.features(),
            &features.sgc,
            &features.asgc,
            &config,
        )
        .unwrap();
        if outcome.weights.numerators() == (0, 0, config.resolution) {
            let asgc = run_method(&ds, &split, Method::Asgc, &features, &config).unwrap();
            assert_eq!(asgc.test_accuracy, outcome.test_accuracy);
        }
    }
}

#[test]
fn default_resolution_trains_ten_candidates_and_dominates_corners() {
    let ds = planted_dataset("dom", 180, 3, 5, false, 0.7, 6);
    let config = ExperimentConfig::default();
    let features = FilteredFeatures::compute(&ds, 2, config.rank_tol).unwrap();
    let split = make_splits(ds.n_nodes(), 1).unwrap();
    let outcome = combo_search(
        &ds,
        &split,
        ds.features(),
        &features.sgc,
        &features.asgc,
        &config,
    )
    .unwrap();
    assert_eq!(outcome.candidates.len(), 10);
    let grid = simplex_grid(3).unwrap();
    assert_eq!(
        outcome.candidates.iter().map(|c| c.0).collect::<Vec<_>>(),
        grid
    );
    let corners = [(3, 0, 0), (0, 3, 0), (0, 0, 3)];
    for (w, acc) in &outcome.candidates {
        assert!(outcome.validation_accuracy >= *acc);
        if corners.contains(&w.numerators()) {
            assert!(outcome.validation_accuracy >= *acc);
        }
    }
    let first_best = outcome
        .candidates
        .iter()
        .find(|c| c.1 == outcome.validation_accuracy)
        .unwrap();
    assert_eq!(first_best.0, outcome.weights);
}

#[test]
fn methods_share_splits_within_a_trial() {
    let ds = planted_dataset("paired", 100, 2, 3, true, 1.0, 4);
    let config = ExperimentConfig::default();
    let features = FilteredFeatures::compute(&ds, 2, config.rank_tol).unwrap();
    let results = run_trials(&ds, &Method::ALL, &features, 3, 50, &config).unwrap();
    assert_eq!(results.len(), 15);
    for r in &results {
        assert_eq!(r.seed, trial_seed(50, r.trial));
        assert!((0.0..=1.0).contains(&r.test_accuracy));
        assert_eq!(r.chosen_weights.is_some(), r.method == Method::Combo);
    }
}

#[test]
fn sweep_cardinality_and_determinism() {
    let ds = planted_dataset("k", 90, 2, 3, false, 1.0, 5);
    let config = ExperimentConfig::default();
    let one = k_sweep(&ds, &[Method::Asgc], &[3], 1, 0, &config).unwrap();
    assert_eq!(one.len(), 1);
    let full = k_sweep(
        &ds,
        &[Method::Raw, Method::Sgc, Method::Asgc],
        &[1, 2, 3],
        2,
        0,
        &config,
    )
    .unwrap();
    assert_eq!(full.len(), 18);
    let again = k_sweep(
        &ds,
        &[Method::Raw, Method::Sgc, Method::Asgc],
        &[1, 2, 3],
        2,
        0,
        &config,
    )
    .unwrap();
    assert_eq!(full, again);
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let serial = single.install(|| {
        k_sweep(
            &ds,
            &[Method::Raw, Method::Sgc, Method::Asgc],
            &[1, 2, 3],
            2,
            0,
            &config,
        )
        .unwrap()
    });
    assert_eq!(full, serial);
    assert!(k_sweep(&ds, &[Method::Raw], &[], 1, 0, &config).is_err());
}

#[test]
fn two_dataset_hand_computation() {
    let results = vec![
        result("d1", Method::Raw, 0, 0.8),
        result("d2", Method::Raw, 0, 0.9),
        result("d1", Method::Sgc, 0, 0.8),
        result("d2", Method::Sgc, 0, 0.6),
    ];
    let report = aggregate(&results, None).unwrap();
    let raw = report
        .per_method
        .iter()
        .find(|m| m.method == "raw")
        .unwrap();
    let sgc = report
        .per_method
        .iter()
        .find(|m| m.method == "sgc")
        .unwrap();
    assert!((raw.mean_proportion - 1.0).abs() < 1e-15 && (raw.min_proportion - 1.0).abs() < 1e-15);
    assert!((sgc.mean_proportion - 5.0 / 6.0).abs() < 1e-12);
    assert!((sgc.min_proportion - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn population_std_and_single_method() {
    let results = vec![
        result("d", Method::Asgc, 0, 0.5),
        result("d", Method::Asgc, 1, 0.7),
    ];
    let report = aggregate(&results, None).unwrap();
    let row = &report.per_dataset[0];
    assert!((row.mean - 0.6).abs() < 1e-12);
    assert!((row.std - 0.1).abs() < 1e-12);
    assert_eq!(row.proportion, 1.0);
}

#[test]
fn external_baselines_join_as_reported_rows() {
    let results = vec![
        result("d1", Method::Raw, 0, 0.5),
        result("d2", Method::Raw, 0, 0.5),
    ];
    let mut external = ExternalBaselines::default();
    external.insert("gcn", "d1", 1.0);
    external.insert("gcn", "d2", 0.25);
    let report = aggregate(&results, Some(&external)).unwrap();
    let gcn = report
        .per_method
        .iter()
        .find(|m| m.method == "gcn")
        .unwrap();
    assert!(gcn.reported);
    assert!((gcn.min_proportion - 0.5).abs() < 1e-12);
    let raw = report
        .per_method
        .iter()
        .find(|m| m.method == "raw")
        .unwrap();
    assert!((raw.min_proportion - 0.5).abs() < 1e-12);
    assert!(!raw.reported);
}

#[test]
fn missing_coverage_is_an_error() {
    let results = vec![
        result("d1", Method::Raw, 0, 0.5),
        result("d2", Method::Raw, 0, 0.5),
        result("d1", Method::Sgc, 0, 0.5),
    ];
    assert!(matches!(
        aggregate(&results, None),
        Err(Error::MissingCoverage { .. })
    ));
}

#[test]
fn method_names_parse_back() {
    for m in Method::ALL {
        assert_eq!(m.name().parse::<Method>().unwrap(), m);
        assert_eq!(m.name().to_uppercase().parse::<Method>().unwrap(), m);
    }
    assert!("gcn".parse::<Method>().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn proportions_are_scale_free(accs in prop::collection::vec(0.05f64..1.0, 6), scale in 0.1f64..1.0) {
        let methods = [Method::Raw, Method::Sgc, Method::Asgc];
        let build = |factor: f64| {
            let mut out = Vec::new();
            for (i, m) in methods.iter().enumerate() {
                out.push(result("a", *m, 0, accs[i] * factor));
                out.push(result("b", *m, 0, accs[3 + i]));
            }
            out
        };
        let base = aggregate(&build(1.0), None).unwrap();
        let scaled = aggregate(&build(scale), None).unwrap();
        for (x, y) in base.per_dataset.iter().zip(&scaled.per_dataset) {
            prop_assert!((x.proportion - y.proportion).abs() < 1e-12);
            prop_assert!(x.proportion > 0.0 && x.proportion <= 1.0);
        }
        for ds in ["a", "b"] {
            let best = base.per_dataset.iter().filter(|r| r.dataset == ds).map(|r| r.proportion).fold(0.0, f64::max);
            prop_assert_eq!(best, 1.0);
        }
    }
}
