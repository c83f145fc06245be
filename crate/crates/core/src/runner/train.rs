use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::error::{Result, SopError};
use crate::model::{
    fit_classifier, train, Checkpoint, Segmentation, SopModel, ToyBackbone, TrainConfig,
};
use crate::runner::config::RunConfig;
use crate::runner::data::load_dataset;
use crate::runner::{emit, fmt_num, to_stable_json, RunOutcome};

/// `segments` contiguous runs over `d` features whose lengths differ by at most one.
/// Splits `d` features into `segments` contiguous runs of near-equal length.
pub fn contiguous_segments(d: usize, segments: usize) -> Result<Segmentation> {
    if segments == 0 || segments > d {
        return Err(SopError::Config(format!(
            "segments must be between 1 and the feature count {d}, got {segments}"
        )));
    }
    Segmentation::new((0..d).map(|i| i * segments / d).collect())
}

/// Fits a seeded toy backbone's classifier on the dataset, trains the SOP wrapper and
/// writes `checkpoint.json`, `loss_history.csv` and `results.json`.
pub fn cmd_train(config: &RunConfig, out: &Path) -> Result<RunOutcome> {
    let seed = config.require_seed()?;
    let ts = config.section(&config.train, "train")?;
    let data = load_dataset(&config.path(&ts.dataset))?;
    let d = data.n_features();
    let n_classes = data.n_classes().max(2);
    let seg = contiguous_segments(d, ts.segments)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let raw = ToyBackbone::random(&ts.backbone, d, ts.embed_dim, n_classes, &mut rng)?;
    let head = fit_classifier(
        &raw,
        &data.inputs,
        &data.labels,
        n_classes,
        ts.classifier_steps,
        ts.classifier_learning_rate,
    )?;
    let backbone = raw.with_classifier(head)?;

    let train_cfg = TrainConfig {
        steps: ts.steps,
        learning_rate: ts.learning_rate,
        heads: ts.heads,
        seed,
        train_classifier: ts.train_classifier,
    };
    let outcome = train(&data, &seg, &backbone, &train_cfg)?;
    let model = SopModel::new(seg, outcome.params, backbone)?;

    let mut artifacts = Vec::new();
    emit(
        out,
        "checkpoint.json",
        &to_stable_json(&Checkpoint::from_model(&model))?,
        &mut artifacts,
    )?;
    let mut csv = String::from("step,loss\n");
    for (step, loss) in outcome.loss_history.iter().enumerate() {
        csv.push_str(&format!("{step},{}\n", fmt_num(*loss)));
    }
    emit(out, "loss_history.csv", &csv, &mut artifacts)?;

    let mut notes = Vec::new();
    let passed = match ts.min_accuracy {
        Some(min) => {
            let ok = outcome.accuracy >= min;
            notes.push(format!(
                "[{}] training accuracy {} >= {min}",
                if ok { "PASS" } else { "FAIL" },
                outcome.accuracy
            ));
            ok
        }
        None => true,
    };
    let results = json!({
        "seed": seed,
        "steps": ts.steps,
        "n_examples": data.len(),
        "n_features": d,
        "n_classes": n_classes,
        "n_segments": model.segmentation.n_segments(),
        "heads": ts.heads,
        "backbone": ts.backbone,
        "generator_trained": outcome.generator_trained,
        "initial_loss": outcome.loss_history.first(),
        "final_loss": outcome.loss_history.last(),
        "accuracy": outcome.accuracy,
        "passed": passed,
        "notes": notes,
    });
    emit(
        out,
        "results.json",
        &to_stable_json(&results)?,
        &mut artifacts,
    )?;
    Ok(RunOutcome {
        passed,
        artifacts,
        notes,
    })
}
