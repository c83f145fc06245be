use std::path::Path;

use serde_json::json;

use crate::error::{shape_err, Result};
use crate::model::{Backbone, GroupedAttribution, SopModel};
use crate::runner::config::RunConfig;
use crate::runner::eval::load_checkpoint;
use crate::runner::{emit, fmt_num, to_stable_json, RunOutcome};
use crate::structures::{
    group_intensity, label_group, load_segmentation, score_mass_by_label, IntensityMap,
};

/// Runs the checkpoint on each map under that map's own segmentation, labels every group
/// and aggregates score mass per label. Writes `labels.csv` and `results.json`.
pub fn cmd_label(config: &RunConfig, out: &Path) -> Result<RunOutcome> {
    let lc = config.section(&config.label, "label")?;
    let base = load_checkpoint(&config.path(&lc.checkpoint))?;
    let mut maps = Vec::with_capacity(lc.maps.len());
    let mut attrs: Vec<GroupedAttribution> = Vec::with_capacity(lc.maps.len());
    for (i, input) in lc.maps.iter().enumerate() {
        let map = IntensityMap::load(&config.path(&input.map))?;
        let seg = load_segmentation(&config.path(&input.segmentation), map.height(), map.width())?;
        if seg.n_features() != base.backbone.input_dim() {
            return Err(shape_err(format!(
                "map {i} has {} pixels, the model takes {}",
                seg.n_features(),
                base.backbone.input_dim()
            )));
        }
        if seg.n_segments() != base.segmentation.n_segments() {
            return Err(shape_err(format!(
                "map {i} has {} segments, the model was built for {}",
                seg.n_segments(),
                base.segmentation.n_segments()
            )));
        }
        let model = SopModel::new(seg, base.params.clone(), base.backbone.clone())?;
        attrs.push(model.forward(map.values())?);
        maps.push(map);
    }
    let pairs: Vec<_> = maps.iter().zip(&attrs).collect();
    let report = score_mass_by_label(&pairs, lc.cluster_sigma)?;

    let n_targets = base.params.sel.n_classes();
    let mut csv = String::from("map,group,intensity,label");
    for k in 0..n_targets {
        csv.push_str(&format!(",score_{k}"));
    }
    csv.push('\n');
    for (m, (map, attr)) in pairs.iter().enumerate() {
        for (g, mask) in attr.masks.iter().enumerate() {
            let intensity = group_intensity(map, mask)?;
            let label = label_group(map, mask, lc.cluster_sigma)?;
            csv.push_str(&format!(
                "{m},{g},{},{}",
                fmt_num(intensity),
                label.kind.as_str()
            ));
            for k in 0..n_targets {
                csv.push_str(&format!(",{}", fmt_num(attr.scores.get(g, k))));
            }
            csv.push('\n');
        }
    }
    let results = json!({
        "cluster_sigma": lc.cluster_sigma,
        "n_maps": maps.len(),
        "sigmas": maps.iter().map(IntensityMap::sigma).collect::<Vec<_>>(),
        "score_mass": report,
    });
    let mut artifacts = Vec::new();
    emit(out, "labels.csv", &csv, &mut artifacts)?;
    emit(
        out,
        "results.json",
        &to_stable_json(&results)?,
        &mut artifacts,
    )?;
    Ok(RunOutcome {
        passed: true,
        artifacts,
        notes: vec![],
    })
}
