use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{domain_err, shape_err, Result};
use crate::model::GroupedAttribution;
use crate::structures::map::IntensityMap;

pub const DEFAULT_CLUSTER_SIGMA: f64 = 3.0;
pub const HISTOGRAM_BINS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StructureKind {
    Void,
    Cluster,
    Other,
}

impl StructureKind {
    pub const ALL: [StructureKind; 3] = [
        StructureKind::Void,
        StructureKind::Cluster,
        StructureKind::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StructureKind::Void => "void",
            StructureKind::Cluster => "cluster",
            StructureKind::Other => "other",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructureLabel {
    pub kind: StructureKind,
    pub threshold_sigma: f64,
}

/// Mean of the (zero-mean) map over pixels with positive mask weight.
pub fn group_intensity(map: &IntensityMap, mask: &[f64]) -> Result<f64> {
    if mask.len() != map.len() {
        return Err(shape_err(format!(
            "mask has {} entries for a map of {} pixels",
            mask.len(),
            map.len()
        )));
    }
    let (sum, count) = map
        .values()
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m > 0.0)
        .fold((0.0, 0usize), |(s, c), (v, _)| (s + v, c + 1));
    if count == 0 {
        return Err(domain_err("group has no active pixels"));
    }
    Ok(sum / count as f64)
}

/// Void below zero, cluster at or above `cluster_sigma` standard deviations, other
/// in between. A cluster also needs positive intensity, so flat maps have none.
pub fn label_group(map: &IntensityMap, mask: &[f64], cluster_sigma: f64) -> Result<StructureLabel> {
    if !cluster_sigma.is_finite() || cluster_sigma < 0.0 {
        return Err(domain_err(format!(
            "cluster threshold {cluster_sigma} must be >= 0"
        )));
    }
    let intensity = group_intensity(map, mask)?;
    let kind = if intensity < 0.0 {
        StructureKind::Void
    } else if intensity > 0.0 && intensity >= cluster_sigma * map.sigma() {
        StructureKind::Cluster
    } else {
        StructureKind::Other
    };
    Ok(StructureLabel {
        kind,
        threshold_sigma: cluster_sigma,
    })
}

/// Fraction of one map's score mass per label.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LabelMass {
    pub void: f64,
    pub cluster: f64,
    pub other: f64,
}

impl LabelMass {
    pub fn get(&self, kind: StructureKind) -> f64 {
        match kind {
            StructureKind::Void => self.void,
            StructureKind::Cluster => self.cluster,
            StructureKind::Other => self.other,
        }
    }

    fn get_mut(&mut self, kind: StructureKind) -> &mut f64 {
        match kind {
            StructureKind::Void => &mut self.void,
            StructureKind::Cluster => &mut self.cluster,
            StructureKind::Other => &mut self.other,
        }
    }

    pub fn total(&self) -> f64 {
        self.void + self.cluster + self.other
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetMass {
    pub target: usize,
    pub per_map: Vec<LabelMass>,
    pub mean: LabelMass,
    /// Counts of per-map masses in `HISTOGRAM_BINS` equal bins over `[0, 1]`.
    pub histograms: BTreeMap<StructureKind, Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreMassReport {
    pub cluster_sigma: f64,
    pub targets: Vec<TargetMass>,
}

fn bin_of(v: f64) -> usize {
    ((v.clamp(0.0, 1.0) * HISTOGRAM_BINS as f64) as usize).min(HISTOGRAM_BINS - 1)
}

/// Labels every group of every map, then sums group scores per label for each target.
/// Each map's masses are normalized by that map's total score for the target.
pub fn score_mass_by_label(
    items: &[(&IntensityMap, &GroupedAttribution)],
    cluster_sigma: f64,
) -> Result<ScoreMassReport> {
    let Some((_, first)) = items.first() else {
        return Err(domain_err("no attributions to aggregate"));
    };
    let n_targets = first.n_classes();
    let mut labels = Vec::with_capacity(items.len());
    for (i, (map, attr)) in items.iter().enumerate() {
        if attr.n_classes() != n_targets {
            return Err(shape_err(format!(
                "map {i} has {} targets, expected {n_targets}",
                attr.n_classes()
            )));
        }
        let kinds = attr
            .masks
            .iter()
            .map(|m| label_group(map, m, cluster_sigma).map(|l| l.kind))
            .collect::<Result<Vec<_>>>()?;
        labels.push(kinds);
    }
    let mut targets = Vec::with_capacity(n_targets);
    for k in 0..n_targets {
        let mut per_map = Vec::with_capacity(items.len());
        for (i, ((_, attr), kinds)) in items.iter().zip(&labels).enumerate() {
            let mut mass = LabelMass::default();
            let mut total = 0.0;
            for (g, &kind) in kinds.iter().enumerate() {
                let c = attr.scores.get(g, k);
                *mass.get_mut(kind) += c;
                total += c;
            }
            if total <= 0.0 {
                return Err(domain_err(format!(
                    "map {i} has no positive score mass for target {k}"
                )));
            }
            for kind in StructureKind::ALL {
                *mass.get_mut(kind) /= total;
            }
            per_map.push(mass);
        }
        let n = per_map.len() as f64;
        let mut mean = LabelMass::default();
        let mut histograms = BTreeMap::new();
        for kind in StructureKind::ALL {
            *mean.get_mut(kind) = per_map.iter().map(|m| m.get(kind)).sum::<f64>() / n;
            let mut hist = vec![0usize; HISTOGRAM_BINS];
            for m in &per_map {
                hist[bin_of(m.get(kind))] += 1;
            }
            histograms.insert(kind, hist);
        }
        targets.push(TargetMass {
            target: k,
            per_map,
            mean,
            histograms,
        });
    }
    Ok(ScoreMassReport {
        cluster_sigma,
        targets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::DenseMatrix;

    fn map() -> IntensityMap {
        // zero mean already; sigma = sqrt(mean of squares)
        IntensityMap::new(1, 6, vec![-1.0, -1.0, -1.0, -1.0, -1.0, 5.0]).unwrap()
    }

    #[test]
    fn intensity_is_masked_mean() {
        let m = IntensityMap::new(1, 3, vec![2.0, 4.0, 9.0]).unwrap();
        // mean 5 removed: [-3, -1, 4]
        assert_eq!(group_intensity(&m, &[1.0, 1.0, 0.0]).unwrap(), -2.0);
        assert_eq!(group_intensity(&m, &[0.2, 7.0, 0.0]).unwrap(), -2.0);
        assert!(group_intensity(&m, &[1.0, 1.0, 1.0]).unwrap().abs() < 1e-15);
        assert!(group_intensity(&m, &[0.0; 3]).is_err());
        assert!(group_intensity(&m, &[1.0; 2]).is_err());
    }

    #[test]
    fn labels_by_threshold() {
        let m = map();
        let sigma = m.sigma();
        assert!((sigma - 5.0f64.sqrt()).abs() < 1e-12);
        let bright = [0.0, 0.0, 0.0, 0.0, 0.0, 1.0];
        assert_eq!(
            label_group(&m, &bright, 2.0).unwrap().kind,
            StructureKind::Cluster
        );
        assert_eq!(
            label_group(&m, &bright, 3.0).unwrap().kind,
            StructureKind::Other
        );
        assert_eq!(
            label_group(&m, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0], 3.0)
                .unwrap()
                .kind,
            StructureKind::Void
        );
        let flat = IntensityMap::new(2, 2, vec![0.0; 4]).unwrap();
        assert_eq!(
            label_group(&flat, &[1.0; 4], 3.0).unwrap().kind,
            StructureKind::Other
        );
    }

    #[test]
    fn masses_per_label() {
        let m = map();
        let attr = GroupedAttribution::new(
            vec![
                vec![1.0, 1.0, 0.0, 0.0, 0.0, 0.0],
                vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
            ],
            DenseMatrix::from_rows(&[vec![0.6, 0.2], vec![0.4, 0.8]]).unwrap(),
            DenseMatrix::zeros(2, 2),
        )
        .unwrap();
        let r = score_mass_by_label(&[(&m, &attr)], 2.0).unwrap();
        assert_eq!(r.targets.len(), 2);
        assert_eq!(
            r.targets[0].mean,
            LabelMass {
                void: 0.6,
                cluster: 0.4,
                other: 0.0
            }
        );
        assert_eq!(r.targets[1].per_map[0].cluster, 0.8);
        assert_eq!(r.targets[0].histograms[&StructureKind::Void][6], 1);
        assert!(score_mass_by_label(&[], 3.0).is_err());
    }
}
