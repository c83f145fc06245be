use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::error::{domain_err, Result};
use crate::faithfulness::{
    comprehensiveness, deletion_curve, flatten_grouped, grouped_curve, insertion_curve,
    ranking_from_attribution, sparsity, sufficiency, PerturbationKind, PerturbationReport,
};
use crate::io::read_to_string;
use crate::model::{Checkpoint, SopModel, ToyBackbone};
use crate::runner::config::{EvalMetric, RunConfig};
use crate::runner::data::load_dataset;
use crate::runner::{emit, fmt_num, to_stable_json, RunOutcome};

pub(crate) fn load_checkpoint(path: &Path) -> Result<SopModel<ToyBackbone>> {
    let ck: Checkpoint = serde_json::from_str(&read_to_string(path)?)?;
    ck.into_model()
}

fn push_curve(csv: &mut String, example: usize, class: usize, report: &PerturbationReport) {
    for (f, p) in &report.points {
        csv.push_str(&format!(
            "{example},{class},{},{},{}\n",
            report.metric,
            fmt_num(*f),
            fmt_num(*p)
        ));
    }
}

/// Faithfulness sweep of a checkpoint over a dataset; writes `results.json` and
/// `curves.csv` (`example,class,metric,fraction,probability`).
pub fn cmd_eval(config: &RunConfig, out: &Path) -> Result<RunOutcome> {
    let seed = config.require_seed()?;
    let ec = config.section(&config.eval, "eval")?;
    let model = load_checkpoint(&config.path(&ec.checkpoint))?;
    let data = load_dataset(&config.path(&ec.dataset))?;
    let n = ec.max_examples.map_or(data.len(), |m| m.min(data.len()));
    if n == 0 {
        return Err(domain_err("no examples to evaluate"));
    }
    let n_classes = model.params.sel.n_classes();
    if let Some(bad) = ec.classes.iter().flatten().find(|&&k| k >= n_classes) {
        return Err(domain_err(format!(
            "class {bad} out of range for {n_classes} classes"
        )));
    }
    let wants = |m: EvalMetric| ec.metrics.contains(&m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2);

    let mut correct = 0usize;
    let mut per_example = Vec::new();
    let mut sums: BTreeMap<&'static str, (f64, usize)> = BTreeMap::new();
    let mut csv = String::from("example,class,metric,fraction,probability\n");
    for (i, x) in data.inputs.iter().take(n).enumerate() {
        let attr = model.forward(x)?;
        let predicted = attr.predicted_class();
        correct += usize::from(predicted == data.labels[i]);
        let classes = ec.classes.clone().unwrap_or_else(|| vec![predicted]);
        for k in classes {
            let prob = |v: &[f64]| model.probabilities(v).map_or(f64::NAN, |p| p[k]);
            let probs = |v: &[f64]| {
                model
                    .probabilities(v)
                    .unwrap_or_else(|_| vec![f64::NAN; n_classes])
            };
            let groups = attr.for_class(k);
            let ranking = ranking_from_attribution(&flatten_grouped(&groups));
            let mut row = Map::new();
            row.insert("example".into(), json!(i));
            row.insert("class".into(), json!(k));
            let mut record = |name: &'static str, v: f64, row: &mut Map<String, Value>| {
                row.insert(name.into(), json!(v));
                let e = sums.entry(name).or_insert((0.0, 0));
                e.0 += v;
                e.1 += 1;
            };
            let mut curves = Vec::new();
            if wants(EvalMetric::Insertion) {
                curves.push((
                    "insertion_auc",
                    insertion_curve(prob, x, &ranking, ec.step)?,
                ));
            }
            if wants(EvalMetric::Deletion) {
                curves.push(("deletion_auc", deletion_curve(prob, x, &ranking, ec.step)?));
            }
            if wants(EvalMetric::GroupedInsertion) {
                curves.push((
                    "grouped_insertion_auc",
                    grouped_curve(prob, x, &groups, PerturbationKind::Insertion)?,
                ));
            }
            if wants(EvalMetric::GroupedDeletion) {
                curves.push((
                    "grouped_deletion_auc",
                    grouped_curve(prob, x, &groups, PerturbationKind::Deletion)?,
                ));
            }
            if wants(EvalMetric::RandomInsertion) {
                let mut shuffled: Vec<usize> = (0..x.len()).collect();
                shuffled.shuffle(&mut rng);
                let mut report = insertion_curve(prob, x, &shuffled, ec.step)?;
                report.metric = "random_insertion".into();
                curves.push(("random_insertion_auc", report));
            }
            for (name, report) in &curves {
                record(name, report.auc, &mut row);
                push_curve(&mut csv, i, k, report);
            }
            if wants(EvalMetric::Sparsity) {
                record("sparsity", sparsity(&groups)?, &mut row);
            }
            if wants(EvalMetric::Comprehensiveness) || wants(EvalMetric::Sufficiency) {
                let mut rationale = vec![0.0; x.len()];
                let members = groups.members();
                for g in groups
                    .order_by_score()
                    .into_iter()
                    .take(ec.rationale_groups)
                {
                    for &f in &members[g] {
                        rationale[f] = 1.0;
                    }
                }
                if wants(EvalMetric::Comprehensiveness) {
                    record(
                        "comprehensiveness",
                        comprehensiveness(probs, x, &rationale, k)?,
                        &mut row,
                    );
                }
                if wants(EvalMetric::Sufficiency) {
                    record(
                        "sufficiency",
                        sufficiency(probs, x, &rationale, k)?,
                        &mut row,
                    );
                }
            }
            per_example.push(Value::Object(row));
        }
    }

    let accuracy = correct as f64 / n as f64;
    let mut metrics = Map::new();
    if wants(EvalMetric::Accuracy) {
        metrics.insert("accuracy".into(), json!(accuracy));
    }
    for (name, (sum, count)) in sums {
        metrics.insert(name.into(), json!(sum / count as f64));
    }
    let results = json!({
        "seed": seed,
        "step": ec.step,
        "n_examples": n,
        "metrics": metrics,
        "per_example": per_example,
        "baseline": "zero",
    });
    let mut artifacts = Vec::new();
    emit(out, "curves.csv", &csv, &mut artifacts)?;
    emit(
        out,
        "results.json",
        &to_stable_json(&results)?,
        &mut artifacts,
    )?;
    Ok(RunOutcome {
        passed: true,
        artifacts,
        notes: vec![format!("accuracy {accuracy} over {n} examples")],
    })
}
