//! Train a SOP wrapper on two Gaussian blobs and save a checkpoint.
//!
//! cargo run --release --example train_blobs [out.json]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sop_core::model::{fit_classifier, train, Checkpoint, ToyBackbone, TrainConfig};
use sop_core::runner::{contiguous_segments, load_dataset};
use sop_core::SopModel;

fn main() -> sop_core::Result<()> {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/blobs.csv");
    let data = load_dataset(&path)?;
    let seg = contiguous_segments(data.n_features(), 2)?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let raw = ToyBackbone::random("tanh", data.n_features(), 8, 2, &mut rng)?;
    let head = fit_classifier(&raw, &data.inputs, &data.labels, 2, 200, 0.5)?;
    let backbone = raw.with_classifier(head)?;

    let config = TrainConfig {
        steps: 300,
        learning_rate: 0.5,
        heads: 2,
        seed: 7,
        train_classifier: true,
    };
    let outcome = train(&data, &seg, &backbone, &config)?;
    for (step, loss) in outcome.loss_history.iter().enumerate().step_by(50) {
        println!("step {step:4}  loss {loss:.5}");
    }
    println!("final loss {:.5}", outcome.loss_history.last().unwrap());
    println!("training accuracy {:.3}", outcome.accuracy);

    let model = SopModel::new(seg, outcome.params, backbone)?;
    if let Some(out) = std::env::args().nth(1) {
        let json = serde_json::to_string_pretty(&Checkpoint::from_model(&model))?;
        std::fs::write(&out, json).map_err(|source| sop_core::SopError::File {
            path: out.clone().into(),
            source,
        })?;
        println!("wrote {out}");
    }
    Ok(())
}
