mod common;

use common::{random_input, random_model, toy_fixture, vector, RandomSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sop_core::model::{
    reconstruct, GroupGenParams, GroupSelectParams, HeadWeights, LinearBackbone, SopModel,
    SopParams, ToyBackbone,
};
use sop_core::{Backbone, DenseMatrix, Segmentation};

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

#[test]
fn toy_forward_matches_golden_trace() {
    let (x, model, expected) = toy_fixture();
    let attr = model.forward(&x).unwrap();
    for (got, want) in attr.masks.iter().zip(expected["masks"].as_array().unwrap()) {
        assert!(close(got, &vector(want), 1e-12), "mask {got:?}");
    }
    let emb = expected["embeddings"].as_array().unwrap();
    for (i, mask) in attr.masks.iter().enumerate() {
        let masked: Vec<f64> = mask.iter().zip(&x).map(|(m, v)| m * v).collect();
        assert!(close(
            &model.backbone.embed(&masked).unwrap(),
            &vector(&emb[i]),
            1e-12
        ));
    }
    for (i, row) in expected["scores"].as_array().unwrap().iter().enumerate() {
        assert!(close(attr.scores.row(i), &vector(row), 1e-12));
    }
    for (i, row) in expected["partial_logits"]
        .as_array()
        .unwrap()
        .iter()
        .enumerate()
    {
        assert!(close(attr.partial_logits.row(i), &vector(row), 1e-12));
    }
    assert!(close(
        &attr.prediction,
        &vector(&expected["prediction"]),
        1e-12
    ));
    // the fixture exercises exact zeros in both attention blocks
    assert_eq!(attr.masks[1][0], 0.0);
    assert_eq!(attr.scores.get(1, 1), 0.0);
}

#[test]
fn reconstruction_is_exact_and_groups_count() {
    let spec = RandomSpec {
        d: 12,
        n_segments: 4,
        heads: 2,
        h: 5,
        n_classes: 3,
        tanh: true,
        weight_std: 1.0,
    };
    let model = random_model(5, &spec);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        let attr = model.forward(&random_input(&mut rng, 12)).unwrap();
        assert_eq!(attr.n_groups(), 8);
        for k in 0..3 {
            assert_eq!(
                attr.prediction[k],
                reconstruct(&attr.scores, &attr.partial_logits, k)
            );
            let col: f64 = (0..8).map(|i| attr.scores.get(i, k)).sum();
            assert!((col - 1.0).abs() < 1e-9);
        }
        for m in &attr.masks {
            assert!(m.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }
}

#[test]
fn permuting_groups_keeps_prediction() {
    let spec = RandomSpec {
        d: 6,
        n_segments: 3,
        heads: 2,
        h: 4,
        n_classes: 2,
        tanh: false,
        weight_std: 1.0,
    };
    let model = random_model(9, &spec);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let attr = model.forward(&random_input(&mut rng, 6)).unwrap();
    let order = [3, 0, 5, 1, 4, 2];
    let p = attr.permuted(&order).unwrap();
    for (j, &i) in order.iter().enumerate() {
        assert_eq!(p.scores.row(j), attr.scores.row(i));
        assert_eq!(p.partial_logits.row(j), attr.partial_logits.row(i));
    }
    assert!(close(&p.prediction, &attr.prediction, 1e-12));
}

#[test]
fn scores_are_sparse_for_spread_weights() {
    let spec = RandomSpec {
        d: 8,
        n_segments: 4,
        heads: 2,
        h: 6,
        n_classes: 2,
        tanh: true,
        weight_std: 3.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut sparse = 0;
    let mut eligible = 0;
    for draw in 0..100 {
        let model = random_model(100 + draw, &spec);
        let attr = model.forward(&random_input(&mut rng, 8)).unwrap();
        for k in 0..2 {
            let col: Vec<f64> = (0..attr.n_groups())
                .map(|i| attr.scores.get(i, k))
                .collect();
            let uniform = col.iter().all(|&c| (c - col[0]).abs() < 1e-12);
            if !uniform {
                eligible += 1;
                sparse += usize::from(col.contains(&0.0));
            }
        }
    }
    assert!(eligible > 150);
    assert_eq!(sparse, eligible);
}

#[test]
fn zeroing_one_pair_changes_prediction_by_its_term() {
    let (x, model, _) = toy_fixture();
    let attr = model.forward(&x).unwrap();
    for k in 0..2 {
        let i = (0..attr.n_groups())
            .min_by(|&a, &b| attr.scores.get(a, k).total_cmp(&attr.scores.get(b, k)))
            .unwrap();
        let mut scores = attr.scores.data().to_vec();
        scores[i * attr.n_classes() + k] = 0.0;
        let s = DenseMatrix::new(attr.n_groups(), attr.n_classes(), scores).unwrap();
        let changed = reconstruct(&s, &attr.partial_logits, k);
        let term = attr.scores.get(i, k) * attr.partial_logits.get(i, k);
        assert!((attr.prediction[k] - changed - term).abs() < 1e-15);
    }
}

#[test]
fn single_segment_linear_model_is_the_classifier() {
    let w = DenseMatrix::from_rows(&[vec![0.5, -1.0, 0.2], vec![0.1, 0.3, -0.7]]).unwrap();
    let c = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![-0.5, 0.25]]).unwrap();
    let bb = ToyBackbone::Linear(LinearBackbone::new(w, vec![0.05, -0.1], c.clone()).unwrap());
    let gen = GroupGenParams::new(vec![HeadWeights {
        w_q: DenseMatrix::from_fn(2, 2, |i, j| (i + j) as f64),
        w_k: DenseMatrix::from_fn(2, 2, |i, j| i as f64 - j as f64),
    }])
    .unwrap();
    let sel =
        GroupSelectParams::new(DenseMatrix::identity(2), DenseMatrix::identity(2), c).unwrap();
    let model = SopModel::new(
        Segmentation::new(vec![0; 3]).unwrap(),
        SopParams { gen, sel },
        bb,
    )
    .unwrap();
    let x = [0.4, -1.2, 2.0];
    let attr = model.forward(&x).unwrap();
    assert_eq!(attr.masks, vec![vec![1.0; 3]]);
    let direct = model.backbone.logits(&x).unwrap();
    assert!(close(&attr.prediction, &direct, 1e-12));
}

#[test]
fn linear_backbone_masking_is_consistent() {
    let spec = RandomSpec {
        d: 6,
        n_segments: 2,
        heads: 1,
        h: 3,
        n_classes: 2,
        tanh: false,
        weight_std: 1.0,
    };
    let model = random_model(77, &spec);
    let ToyBackbone::Linear(lin) = &model.backbone else {
        unreachable!()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(78);
    let x = random_input(&mut rng, 6);
    let attr = model.forward(&x).unwrap();
    let c = &model.params.sel.c;
    for k in 0..2 {
        // sum_i c_ik C_k (W (S_i x) + b), evaluated directly
        let mut expected = 0.0;
        for (i, mask) in attr.masks.iter().enumerate() {
            let masked: Vec<f64> = mask.iter().zip(&x).map(|(m, v)| m * v).collect();
            let z: Vec<f64> = (0..3)
                .map(|r| {
                    lin.bias()[r]
                        + (0..6)
                            .map(|j| lin.weight().get(r, j) * masked[j])
                            .sum::<f64>()
                })
                .collect();
            let y: f64 = (0..3).map(|r| c.get(k, r) * z[r]).sum();
            expected += attr.scores.get(i, k) * y;
        }
        assert!((attr.prediction[k] - expected).abs() < 1e-12);
    }
}
