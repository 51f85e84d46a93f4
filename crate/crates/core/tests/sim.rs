mod common;

use common::brute_knn;
use ndarray::Array2;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use semint_core::corpus::synth_clusters;
use semint_core::rng;
use semint_core::sim::{
    knn_accuracy_points, loglog_exponent, run_learning_curve, run_timing_benchmark, SimConfig,
};
use semint_core::{Pipeline, PipelineConfig};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn knn_matches_brute_force(
        n in 3usize..30,
        k_frac in 0.0f64..1.0,
        seed in any::<u64>(),
        grid in any::<bool>(),
    ) {
        use rand::Rng;
        let mut r = rng::seeded(seed);
        // Integer grids produce plenty of exact distance ties.
        let points = Array2::from_shape_fn((n, 2), |_| {
            if grid { r.random_range(0..4) as f64 } else { r.random_range(-1.0..1.0) }
        });
        let classes = r.random_range(2..5usize);
        let labels: Vec<usize> = (0..n).map(|_| r.random_range(0..classes)).collect();
        let k = 1 + ((n - 2) as f64 * k_frac) as usize;
        prop_assert_eq!(knn_accuracy_points(points.view(), &labels, k).unwrap(), brute_knn(points.view(), &labels, k));
    }
}

#[test]
fn permuted_labels_score_near_chance() {
    let corpus = synth_clusters(2, 30, 4, 0.05, 0).unwrap();
    let x = corpus.matrix().unwrap();
    let base = corpus.labels().unwrap();
    let mut r = rng::seeded(3);
    let mut total = 0.0;
    for _ in 0..50 {
        let mut labels = base.clone();
        labels.shuffle(&mut r);
        total += knn_accuracy_points(x.view(), &labels, 5).unwrap();
    }
    let mean = total / 50.0;
    assert!((mean - 0.5).abs() < 0.1, "{mean}");
}

#[test]
fn zero_iterations_gives_single_point() {
    let corpus = synth_clusters(3, 10, 8, 0.2, 1).unwrap();
    let sim = SimConfig { iterations: 0, ..Default::default() };
    for p in [Pipeline::DeepSi, Pipeline::NeuralSi] {
        let c = run_learning_curve(p, &corpus, &sim, &PipelineConfig::default()).unwrap();
        assert_eq!(c.accuracies.len(), 1);
    }
}

#[test]
fn curves_stay_in_unit_interval_and_depend_on_seeds() {
    let corpus = synth_clusters(3, 12, 8, 0.3, 2).unwrap();
    let cfg = PipelineConfig::default();
    let a = run_learning_curve(Pipeline::NeuralSi, &corpus, &SimConfig { iterations: 6, seed: 1, ..Default::default() }, &cfg).unwrap();
    let b = run_learning_curve(Pipeline::NeuralSi, &corpus, &SimConfig { iterations: 6, seed: 2, ..Default::default() }, &cfg).unwrap();
    assert_eq!(a.accuracies.len(), 7);
    assert!(a.accuracies.iter().chain(&b.accuracies).all(|v| (0.0..=1.0).contains(v)));
    assert_eq!(a.accuracies[0], b.accuracies[0]);
    assert_ne!(a.accuracies, b.accuracies);
}

#[test]
fn unlabeled_corpus_cannot_make_a_curve() {
    let corpus = synth_clusters(3, 5, 4, 0.3, 2).unwrap().without_labels();
    assert!(run_learning_curve(Pipeline::DeepSi, &corpus, &SimConfig::default(), &PipelineConfig::default()).is_err());
}

#[test]
fn small_benchmark_produces_full_table() {
    let family = |n: usize| synth_clusters(4, n / 4, 16, 0.3, 0);
    let report = run_timing_benchmark(
        &[Pipeline::DeepSi, Pipeline::NeuralSi],
        &family,
        &[40, 80],
        2,
        &PipelineConfig { epochs_per_update: 5, ..Default::default() },
        &SimConfig::default(),
    )
    .unwrap();
    assert_eq!(report.table.rows.len(), 4);
    assert_eq!(report.stages.len(), 4);
    for row in &report.table.rows {
        assert!(row.mean_s > 0.0 && row.repeats == 2);
    }
    assert!(loglog_exponent(report.table.rows.iter().filter(|r| r.pipeline == Pipeline::DeepSi)).is_some());
    assert!(report.stages.iter().any(|s| s.stages.contains_key("mds")));
    assert!(run_timing_benchmark(&[Pipeline::DeepSi], &family, &[40], 0, &PipelineConfig::default(), &SimConfig::default()).is_err());
}
