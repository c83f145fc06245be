#![allow(dead_code)]

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use sop_core::model::{
    Dataset, GroupGenParams, GroupSelectParams, HeadWeights, LinearBackbone, SopModel, SopParams,
    TanhBackbone, ToyBackbone,
};
use sop_core::runner::load_dataset;
use sop_core::{DenseMatrix, Segmentation};

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

pub fn read_json(name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(data_path(name)).unwrap()).unwrap()
}

pub fn vector(v: &Value) -> Vec<f64> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect()
}

pub fn matrix(v: &Value) -> DenseMatrix {
    let rows: Vec<Vec<f64>> = v.as_array().unwrap().iter().map(vector).collect();
    DenseMatrix::from_rows(&rows).unwrap()
}

/// The hand-set d = 4 fixture: 2 segments, 1 head, linear backbone with h = 2.
pub fn toy_fixture() -> (Vec<f64>, SopModel<ToyBackbone>, Value) {
    let fx = read_json("toy_forward.json");
    let bb = &fx["backbone"];
    let backbone = ToyBackbone::Linear(
        LinearBackbone::new(
            matrix(&bb["weight"]),
            vector(&bb["bias"]),
            matrix(&bb["classifier"]),
        )
        .unwrap(),
    );
    let seg = Segmentation::new(
        fx["segmentation"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_u64().unwrap() as usize)
            .collect(),
    )
    .unwrap();
    let gen = GroupGenParams::new(vec![HeadWeights {
        w_q: matrix(&fx["w_q"]),
        w_k: matrix(&fx["w_k"]),
    }])
    .unwrap();
    let sel = GroupSelectParams::new(
        matrix(&fx["w_q_sel"]),
        matrix(&fx["w_k_sel"]),
        matrix(&bb["classifier"]),
    )
    .unwrap();
    let model = SopModel::new(seg, SopParams { gen, sel }, backbone).unwrap();
    (vector(&fx["x"]), model, fx["expected"].clone())
}

pub fn blobs() -> Dataset {
    load_dataset(&data_path("blobs.csv")).unwrap()
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize, std: f64) -> DenseMatrix {
    // Box-Muller keeps this independent of the library's sampling
    DenseMatrix::from_fn(rows, cols, |_, _| {
        let u1: f64 = rng.random_range(1e-12..1.0);
        let u2: f64 = rng.random();
        std * (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    })
}

pub struct RandomSpec {
    pub d: usize,
    pub n_segments: usize,
    pub heads: usize,
    pub h: usize,
    pub n_classes: usize,
    pub tanh: bool,
    /// Std of the generator and selector projections.
    pub weight_std: f64,
}

/// A random SOP model with non-degenerate attention weights.
pub fn random_model(seed: u64, spec: &RandomSpec) -> SopModel<ToyBackbone> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = gaussian(&mut rng, spec.h, spec.d, 1.0 / (spec.d as f64).sqrt());
    let b = gaussian(&mut rng, 1, spec.h, 0.1).row(0).to_vec();
    let c = gaussian(&mut rng, spec.n_classes, spec.h, 1.0);
    let backbone = if spec.tanh {
        ToyBackbone::Tanh(TanhBackbone::new(w, b, c.clone()).unwrap())
    } else {
        ToyBackbone::Linear(LinearBackbone::new(w, b, c.clone()).unwrap())
    };
    let seg =
        Segmentation::new((0..spec.d).map(|i| i * spec.n_segments / spec.d).collect()).unwrap();
    let p = spec.n_segments + 1;
    let heads = (0..spec.heads)
        .map(|_| HeadWeights {
            w_q: gaussian(&mut rng, p, p, spec.weight_std),
            w_k: gaussian(&mut rng, p, p, spec.weight_std),
        })
        .collect();
    let sel = GroupSelectParams::new(
        gaussian(&mut rng, spec.h, spec.h, spec.weight_std),
        gaussian(&mut rng, spec.h, spec.h, spec.weight_std),
        c,
    )
    .unwrap();
    SopModel::new(
        seg,
        SopParams {
            gen: GroupGenParams::new(heads).unwrap(),
            sel,
        },
        backbone,
    )
    .unwrap()
}

pub fn random_input(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()
}

/// Generator whose projections are `gain * I` on the one-hot token part: every group is a
/// single segment once `gain^2 / sqrt(d) >= 1`, `d` being the feature count.
pub fn identity_generator(n_segments: usize, heads: usize, gain: f64) -> GroupGenParams {
    let p = n_segments + 1;
    let w = DenseMatrix::from_fn(p, p, |i, j| if i == j && i > 0 { gain } else { 0.0 });
    GroupGenParams::new(
        (0..heads)
            .map(|_| HeadWeights {
                w_q: w.clone(),
                w_k: w.clone(),
            })
            .collect(),
    )
    .unwrap()
}
