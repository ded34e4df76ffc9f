mod common;

use common::pairwise_auc;
use hqc::data::{generate, SyntheticKind};
use hqc::metrics::{accuracy, evaluate, reliability_curve, roc_curve};
use proptest::prelude::*;

/// Scores on a 1/1000 grid so ties occur and cubes stay distinct; both
/// classes are forced present.
fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<u8>)> {
    (2usize..=500)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(0u32..=1000, n),
                prop::collection::vec(0u8..=1, n),
            )
        })
        .prop_map(|(grid, mut labels)| {
            labels[0] = 0;
            labels[1] = 1;
            (
                grid.into_iter().map(|g| f64::from(g) / 1000.0).collect(),
                labels,
            )
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trapezoid_auc_equals_pair_counting((scores, labels) in instance()) {
        let roc = roc_curve(&scores, &labels).unwrap();
        prop_assert!((roc.auc - pairwise_auc(&scores, &labels)).abs() <= 1e-12);
        let first = roc.points.first().unwrap();
        let last = roc.points.last().unwrap();
        prop_assert_eq!((first.fpr, first.tpr), (0.0, 0.0));
        prop_assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
        prop_assert!(roc.points.windows(2).all(|w| w[0].fpr <= w[1].fpr && w[0].tpr <= w[1].tpr));
    }

    #[test]
    fn auc_ignores_monotone_rescaling((scores, labels) in instance()) {
        let cubed: Vec<f64> = scores.iter().map(|s| s.powi(3)).collect();
        let a = roc_curve(&scores, &labels).unwrap().auc;
        let b = roc_curve(&cubed, &labels).unwrap().auc;
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn flipped_labels_complement_accuracy((scores, labels) in instance(), t in 0u32..1000) {
        // Midway between grid points, so no score equals the threshold.
        let threshold = (f64::from(t) + 0.5) / 1000.0;
        let flipped: Vec<u8> = labels.iter().map(|l| 1 - l).collect();
        let sum = accuracy(&scores, &labels, threshold).unwrap()
            + accuracy(&scores, &flipped, threshold).unwrap();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn reliability_counts_cover_every_sample((scores, labels) in instance(), bins in 2usize..30) {
        let points = reliability_curve(&scores, &labels, bins).unwrap();
        prop_assert_eq!(points.iter().map(|p| p.count).sum::<usize>(), scores.len());
        prop_assert!(points.windows(2).all(|w| w[0].mean_predicted < w[1].mean_predicted));
    }
}

#[test]
fn calibrated_scores_sit_on_the_diagonal() {
    for seed in 0..3 {
        let data = generate(SyntheticKind::BernoulliScores, 10_000, seed).unwrap();
        let scores: Vec<f64> = data.features().iter().map(|r| r[0]).collect();
        let points = reliability_curve(&scores, data.labels(), 10).unwrap();
        assert_eq!(points.len(), 10);
        for p in points {
            assert!(
                (p.fraction_positive - p.mean_predicted).abs() <= 0.05,
                "seed {seed}: {p:?}"
            );
        }
    }
}

#[test]
fn separable_scores_give_perfect_report() {
    let scores = [0.1, 0.2, 0.3, 0.7, 0.8, 0.9];
    let labels = [0, 0, 0, 1, 1, 1];
    let report = evaluate(&scores, &labels, 0.5, 10).unwrap();
    assert_eq!(report.auc, 1.0);
    assert_eq!(report.accuracy, 1.0);
    assert!(report.pr_points.iter().take(3).all(|p| p.precision == 1.0));
}
