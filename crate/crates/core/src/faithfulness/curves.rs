//! Insertion/deletion curves with zero-masking and trapezoidal AUC.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{domain_err, Result, SopError};
use crate::faithfulness::grouped::ScoredGroups;
use crate::faithfulness::powerset::PerturbationKind;
use crate::math::round_sig;

/// One perturbation curve with its area and provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationReport {
    pub metric: String,
    /// `(fraction of features inserted or deleted, model output)`; fractions strictly
    /// increasing from 0 to 1.
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_error: Option<f64>,
    pub metadata: BTreeMap<String, String>,
}

impl PerturbationReport {
    fn from_points(metric: &str, points: Vec<(f64, f64)>) -> Self {
        let auc = trapezoid_auc(&points);
        let mut metadata = BTreeMap::new();
        metadata.insert("baseline".into(), "zero".into());
        metadata.insert("output".into(), "class probability".into());
        Self {
            metric: metric.to_string(),
            points,
            auc,
            total_error: None,
            metadata,
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<String>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    /// CSV with header `fraction,probability`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fraction,probability\n");
        for (x, y) in &self.points {
            out.push_str(&format!("{},{}\n", round_sig(*x), round_sig(*y)));
        }
        out
    }

    pub fn final_value(&self) -> f64 {
        self.points.last().map_or(f64::NAN, |p| p.1)
    }
}

/// Trapezoidal area under a piecewise-linear curve.
///
/// Accumulated relative to the first value so that a constant curve integrates to exactly
/// that constant times its width.
pub fn trapezoid_auc(points: &[(f64, f64)]) -> f64 {
    let (Some(first), Some(last)) = (points.first(), points.last()) else {
        return 0.0;
    };
    let base = first.1;
    let excess: f64 = points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * ((w[0].1 - base) + (w[1].1 - base)) / 2.0)
        .sum();
    base * (last.0 - first.0) + excess
}

/// Feature order by descending attribution; ties broken by feature index.
pub fn ranking_from_attribution(alpha: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..alpha.len()).collect();
    order.sort_by(|&a, &b| alpha[b].total_cmp(&alpha[a]));
    order
}

fn check_permutation(ranking: &[usize], d: usize) -> Result<()> {
    if ranking.len() != d {
        return Err(domain_err(format!(
            "ranking has {} entries for {d} features",
            ranking.len()
        )));
    }
    let mut seen = vec![false; d];
    for &f in ranking {
        if f >= d || std::mem::replace(&mut seen[f], true) {
            return Err(domain_err("ranking is not a permutation of the features"));
        }
    }
    Ok(())
}

/// Runs a curve that flips features in the given batches, starting from `x` (deletion)
/// or from `0` (insertion).
fn run_batches<F: Fn(&[f64]) -> f64>(
    model: &F,
    x: &[f64],
    batches: &[Vec<usize>],
    direction: PerturbationKind,
) -> Vec<(f64, f64)> {
    let d = x.len() as f64;
    let mut current = match direction {
        PerturbationKind::Insertion => vec![0.0; x.len()],
        PerturbationKind::Deletion => x.to_vec(),
    };
    let mut done = 0usize;
    let mut points = vec![(0.0, model(&current))];
    for batch in batches {
        if batch.is_empty() {
            continue;
        }
        for &f in batch {
            current[f] = match direction {
                PerturbationKind::Insertion => x[f],
                PerturbationKind::Deletion => 0.0,
            };
        }
        done += batch.len();
        points.push((done as f64 / d, model(&current)));
    }
    points
}

fn metric_name(direction: PerturbationKind, grouped: bool) -> String {
    let base = match direction {
        PerturbationKind::Insertion => "insertion",
        PerturbationKind::Deletion => "deletion",
    };
    if grouped {
        format!("grouped_{base}")
    } else {
        base.to_string()
    }
}

/// Per-feature curve: `step` features at a time in ranking order.
pub fn feature_curve<F: Fn(&[f64]) -> f64>(
    model: F,
    x: &[f64],
    ranking: &[usize],
    step: usize,
    direction: PerturbationKind,
) -> Result<PerturbationReport> {
    check_permutation(ranking, x.len())?;
    if x.is_empty() {
        return Err(domain_err("curve over zero features"));
    }
    if step == 0 {
        return Err(domain_err("curve step must be positive"));
    }
    let batches: Vec<Vec<usize>> = ranking.chunks(step).map(<[usize]>::to_vec).collect();
    let points = run_batches(&model, x, &batches, direction);
    Ok(
        PerturbationReport::from_points(&metric_name(direction, false), points)
            .with_meta("step", step.to_string()),
    )
}

/// Inserts features onto a zero baseline in ranking order, `step` at a time.
pub fn insertion_curve<F: Fn(&[f64]) -> f64>(
    model: F,
    x: &[f64],
    ranking: &[usize],
    step: usize,
) -> Result<PerturbationReport> {
    feature_curve(model, x, ranking, step, PerturbationKind::Insertion)
}

/// Deletes features from `x` in ranking order, `step` at a time.
pub fn deletion_curve<F: Fn(&[f64]) -> f64>(
    model: F,
    x: &[f64],
    ranking: &[usize],
    step: usize,
) -> Result<PerturbationReport> {
    feature_curve(model, x, ranking, step, PerturbationKind::Deletion)
}

/// One group per step in descending score order; features already processed are skipped.
/// Features not covered by any group are flipped in a final step so the curve ends at 1.
pub fn grouped_curve<F: Fn(&[f64]) -> f64>(
    model: F,
    x: &[f64],
    beta: &ScoredGroups,
    direction: PerturbationKind,
) -> Result<PerturbationReport> {
    if beta.is_empty() {
        return Err(domain_err("grouped curve needs at least one group"));
    }
    if beta.n_features() != x.len() {
        return Err(SopError::Shape(format!(
            "groups cover {} features, input has {}",
            beta.n_features(),
            x.len()
        )));
    }
    let members = beta.members();
    let mut seen = vec![false; x.len()];
    let mut batches = Vec::with_capacity(beta.len() + 1);
    for g in beta.order_by_score() {
        let fresh: Vec<usize> = members[g]
            .iter()
            .copied()
            .filter(|&f| !std::mem::replace(&mut seen[f], true))
            .collect();
        batches.push(fresh);
    }
    let uncovered = (0..x.len()).filter(|&f| !seen[f]).collect::<Vec<_>>();
    let covered = x.len() - uncovered.len();
    batches.push(uncovered);
    let points = run_batches(&model, x, &batches, direction);
    Ok(
        PerturbationReport::from_points(&metric_name(direction, true), points)
            .with_meta("groups", beta.len().to_string())
            .with_meta("covered_features", covered.to_string()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_model_auc() {
        let x = [0.3, 1.0, -2.0, 4.0, 0.5];
        let r = ranking_from_attribution(&[0.1, 0.9, 0.3, 0.0, 0.3]);
        for step in [1, 2, 5] {
            let ins = insertion_curve(|_| 0.37, &x, &r, step).unwrap();
            let del = deletion_curve(|_| 0.37, &x, &r, step).unwrap();
            assert_eq!(ins.auc, 0.37);
            assert_eq!(del.auc, 0.37);
        }
    }

    #[test]
    fn single_step_is_midpoint() {
        let x = [1.0, 2.0, 3.0];
        let model = |v: &[f64]| v.iter().sum::<f64>() / 6.0;
        let c = insertion_curve(model, &x, &[2, 0, 1], 3).unwrap();
        assert_eq!(c.points, vec![(0.0, 0.0), (1.0, 1.0)]);
        assert_eq!(c.auc, 0.5);
    }

    #[test]
    fn ranking_ties_by_index() {
        assert_eq!(
            ranking_from_attribution(&[0.5, 1.0, 0.5, -1.0]),
            vec![1, 0, 2, 3]
        );
    }

    #[test]
    fn rejects_non_permutation() {
        let x = [1.0, 2.0];
        assert!(insertion_curve(|_| 0.0, &x, &[0, 0], 1).is_err());
        assert!(insertion_curve(|_| 0.0, &x, &[0], 1).is_err());
        assert!(insertion_curve(|_| 0.0, &x, &[0, 2], 1).is_err());
    }

    #[test]
    fn grouped_overlap_counts_union() {
        let x = [1.0; 6];
        let beta = ScoredGroups::from_sets(
            6,
            &[vec![0, 1, 2], vec![2, 3], vec![3, 4, 0]],
            vec![0.5, 0.3, 0.2],
        )
        .unwrap();
        let model = |v: &[f64]| v.iter().sum::<f64>();
        let c = grouped_curve(model, &x, &beta, PerturbationKind::Insertion).unwrap();
        // inserted counts: 3, then 1 new ({3}), then 1 new ({4}), then remainder {5}
        let counts: Vec<f64> = c.points.iter().map(|p| p.1).collect();
        assert_eq!(counts, vec![0.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(c.metadata["covered_features"], "5");
    }

    #[test]
    fn empty_groups_rejected() {
        let beta = ScoredGroups::new(vec![], vec![]).unwrap();
        assert!(grouped_curve(|_| 0.0, &[1.0], &beta, PerturbationKind::Insertion).is_err());
    }
}
