mod common;

use common::{blobs, random_input, random_model, toy_fixture, RandomSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sop_core::math::finite_diff_grad;
use sop_core::model::{
    loss_and_grad, mean_loss, train, train_from, Dataset, SopParams, ToyBackbone, TrainConfig,
    TrainableBlocks,
};
use sop_core::runner::contiguous_segments;

fn check_gradient(model: &sop_core::SopModel<ToyBackbone>, data: &Dataset) {
    let (loss, grads) = loss_and_grad(
        data,
        &model.segmentation,
        &model.params,
        &model.backbone,
        TrainableBlocks::default(),
    )
    .unwrap();
    let flat = model.params.to_flat();
    let f = |p: &[f64]| {
        let params = model.params.from_flat(p).unwrap();
        mean_loss(data, &model.segmentation, &params, &model.backbone).unwrap()
    };
    assert!((f(&flat) - loss).abs() < 1e-12);
    let fd = finite_diff_grad(f, &flat, 1e-6).unwrap();
    let analytic = grads.to_flat();
    assert_eq!(analytic.len(), fd.len());
    for (i, (a, n)) in analytic.iter().zip(&fd).enumerate() {
        assert!(
            (a - n).abs() <= 1e-4 * a.abs().max(n.abs()).max(1e-3),
            "parameter {i}: analytic {a}, numeric {n}"
        );
    }
}

#[test]
fn gradient_matches_finite_differences_on_fixture() {
    let (x, model, _) = toy_fixture();
    let data = Dataset::new(
        vec![x, vec![-0.3, 0.9, 0.2, -1.1], vec![0.5, 0.5, -0.7, 1.4]],
        vec![0, 1, 1],
    )
    .unwrap();
    check_gradient(&model, &data);
}

#[test]
fn gradient_matches_finite_differences_with_tanh_backbone() {
    let spec = RandomSpec {
        d: 6,
        n_segments: 3,
        heads: 2,
        h: 4,
        n_classes: 3,
        tanh: true,
        weight_std: 0.8,
    };
    let model = random_model(41, &spec);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let inputs = (0..4).map(|_| random_input(&mut rng, 6)).collect();
    let data = Dataset::new(inputs, vec![0, 1, 2, 1]).unwrap();
    check_gradient(&model, &data);
}

fn blobs_setup() -> (Dataset, sop_core::Segmentation, ToyBackbone) {
    let data = blobs();
    let seg = contiguous_segments(8, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let backbone = ToyBackbone::random("tanh", 8, 8, 2, &mut rng).unwrap();
    (data, seg, backbone)
}

fn config(steps: usize, learning_rate: f64) -> TrainConfig {
    TrainConfig {
        steps,
        learning_rate,
        heads: 2,
        seed: 3,
        train_classifier: true,
    }
}

#[test]
fn blobs_reach_high_accuracy() {
    let (data, seg, backbone) = blobs_setup();
    let out = train(&data, &seg, &backbone, &config(300, 0.5)).unwrap();
    assert!(out.accuracy >= 0.95, "accuracy {}", out.accuracy);
    assert!(out.generator_trained);
    let (first, last) = (out.loss_history[0], *out.loss_history.last().unwrap());
    assert!(last < first / 4.0, "loss {first} -> {last}");
}

#[test]
fn training_is_deterministic() {
    let (data, seg, backbone) = blobs_setup();
    let a = train(&data, &seg, &backbone, &config(20, 0.5)).unwrap();
    let b = train(&data, &seg, &backbone, &config(20, 0.5)).unwrap();
    assert_eq!(a.params, b.params);
    assert_eq!(a.loss_history, b.loss_history);
}

#[test]
fn zero_learning_rate_and_zero_steps_keep_initialization() {
    let (data, seg, backbone) = blobs_setup();
    let frozen = train(&data, &seg, &backbone, &config(5, 0.0)).unwrap();
    assert_eq!(frozen.params, frozen.initial);
    assert!(frozen.loss_history.windows(2).all(|w| w[0] == w[1]));

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let init = SopParams::init(&backbone, &seg, 2, &mut rng).unwrap();
    let none = train(&data, &seg, &backbone, &config(0, 0.5)).unwrap();
    assert_eq!(none.params, init);
    assert_eq!(none.loss_history.len(), 1);

    let resumed = train_from(&data, &seg, &backbone, init.clone(), &config(0, 0.5)).unwrap();
    assert_eq!(resumed.params, init);
}

#[test]
fn training_rejects_bad_inputs() {
    let (data, seg, backbone) = blobs_setup();
    assert!(train(&data, &seg, &backbone, &config(1, -1.0)).is_err());
    assert!(train(&data, &seg, &backbone, &config(1, f64::NAN)).is_err());
    let narrow = Dataset::new(vec![vec![0.0; 3]], vec![0]).unwrap();
    assert!(train(&narrow, &seg, &backbone, &config(1, 0.1)).is_err());
}
