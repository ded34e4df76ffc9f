mod common;

use common::central_difference;
use hqc::circuits::TemplateFamily;
use hqc::data::{generate, SyntheticKind};
use hqc::hybrid::{train, HybridModel, TrainConfig};
use hqc::nn::{cross_entropy_loss, softmax, Activation, DenseLayer, OptimizerKind, OptimizerState};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-5;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

fn activation_strategy() -> impl Strategy<Value = Activation> {
    prop_oneof![Just(Activation::Tanh), Just(Activation::Identity)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Scalar loss `u · forward(x)` for a fixed random `u`.
    #[test]
    fn dense_backward_matches_finite_differences(
        seed in any::<u64>(),
        in_dim in 1usize..=5,
        out_dim in 1usize..=5,
        activation in activation_strategy(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layer = DenseLayer::init_uniform(in_dim, out_dim, activation, &mut rng).unwrap();
        let x: Vec<f64> = (0..in_dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        let u: Vec<f64> = (0..out_dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (grads, dx) = layer.backward(&x, &u).unwrap();
        let scalar = |l: &DenseLayer, x: &[f64]| -> Vec<f64> {
            vec![l.forward(x).unwrap().iter().zip(&u).map(|(a, b)| a * b).sum()]
        };
        let params = layer.params_flat();
        let analytic = grads.flatten();
        for (k, &a) in analytic.iter().enumerate() {
            let fd = central_difference(
                |p| {
                    let mut l = layer.clone();
                    l.set_params_flat(p).unwrap();
                    scalar(&l, &x)
                },
                &params,
                k,
                H,
            )[0];
            prop_assert!(close(a, fd, 1e-6), "param {k}: {a} vs {fd}");
        }
        for (k, &d) in dx.iter().enumerate() {
            let fd = central_difference(|y| scalar(&layer, y), &x, k, H)[0];
            prop_assert!(close(d, fd, 1e-6));
        }
    }

    #[test]
    fn softmax_is_a_shift_invariant_distribution(
        // Gaps beyond ~36 round probabilities to exactly 0 or 1 in f64.
        logits in prop::collection::vec(-15.0f64..15.0, 1..8),
        shift in -100.0f64..100.0,
    ) {
        let p = softmax(&logits);
        prop_assert!(p.iter().all(|&v| v > 0.0 && (v < 1.0 || logits.len() == 1)));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let shifted: Vec<f64> = logits.iter().map(|l| l + shift).collect();
        for (a, b) in p.iter().zip(softmax(&shifted)) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn adam_ignores_zero_gradients(
        params in prop::collection::vec(-5.0f64..5.0, 1..10),
        steps in 1usize..20,
        lr in 1e-4f64..1.0,
    ) {
        let mut opt = OptimizerState::adam(lr).unwrap();
        let mut p = params.clone();
        let zeros = vec![0.0; p.len()];
        for _ in 0..steps {
            opt.step(&mut p, &zeros).unwrap();
        }
        for (a, b) in p.iter().zip(&params) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn hybrid_gradients_match_finite_differences(
        seed in any::<u64>(),
        family_index in 0usize..6,
        layers in 1usize..=2,
        feature_dim in 1usize..=3,
        label in 0u8..=1,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let family = TemplateFamily::ALL[family_index];
        let mut model = HybridModel::init(feature_dim, family, 2, layers, seed).unwrap();
        // Move circuit angles off the near-zero initialization.
        let mut params = model.params_flat();
        for v in params.iter_mut() {
            *v += rng.random_range(-1.0..1.0);
        }
        model.set_params_flat(&params).unwrap();
        let x: Vec<f64> = (0..feature_dim).map(|_| rng.random_range(-1.5..1.5)).collect();
        let analytic = model.backward(&x, label).unwrap().flatten();
        for (k, &a) in analytic.iter().enumerate() {
            let fd = central_difference(
                |p| {
                    let mut m = model.clone();
                    m.set_params_flat(p).unwrap();
                    vec![cross_entropy_loss(&m.forward(&x).unwrap(), usize::from(label)).unwrap()]
                },
                &params,
                k,
                H,
            )[0];
            prop_assert!(close(a, fd, 1e-5), "param {k}: {a} vs {fd}");
        }
    }
}

fn vqc1_config(seed: u64, epochs: usize, learning_rate: f64) -> TrainConfig {
    TrainConfig {
        template: TemplateFamily::Vqc1,
        num_qubits: 2,
        layers: 1,
        epochs,
        batch_size: 16,
        learning_rate,
        optimizer: OptimizerKind::Adam,
        momentum: None,
        step_size: 1,
        gamma: 1.0,
        freeze_pre_net: false,
        seed,
    }
}

#[test]
fn training_is_reproducible() {
    let data = generate(SyntheticKind::Moons, 80, 3).unwrap();
    let splits = data.split(0.6, 0.2, 3).unwrap();
    let config = vqc1_config(3, 4, 0.05);
    let run = || {
        let model = HybridModel::from_config(2, &config).unwrap();
        train(model, &splits, &config).unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a.history, b.history);
    let bits = |m: &HybridModel| {
        m.params_flat()
            .iter()
            .map(|v| v.to_bits())
            .collect::<Vec<_>>()
    };
    assert_eq!(bits(&a.final_model), bits(&b.final_model));
    assert_eq!(a.model.to_json(), b.model.to_json());
}

#[test]
fn small_step_first_epoch_does_not_raise_loss() {
    let mut deltas: Vec<f64> = (0..5)
        .map(|seed| {
            let data = generate(SyntheticKind::Blobs, 200, seed).unwrap();
            let splits = data.split(0.8, 0.1, seed).unwrap();
            let config = vqc1_config(seed, 1, 1e-4);
            let model = HybridModel::from_config(2, &config).unwrap();
            let before = model.mean_loss(&splits.train).unwrap();
            let out = train(model, &splits, &config).unwrap();
            out.final_model.mean_loss(&splits.train).unwrap() - before
        })
        .collect();
    deltas.sort_by(f64::total_cmp);
    assert!(
        deltas[2] <= 0.0,
        "median first-epoch loss change {deltas:?}"
    );
}
