use serde::{Deserialize, Serialize};

use crate::error::{domain_err, shape_err, Result};

/// A grouped attribution for one output: masks `S_i in [0,1]^d` with scalar scores `c_i`.
///
/// Set membership of a feature in a group is `S_i[f] > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredGroups {
    pub masks: Vec<Vec<f64>>,
    pub scores: Vec<f64>,
}

impl ScoredGroups {
    pub fn new(masks: Vec<Vec<f64>>, scores: Vec<f64>) -> Result<Self> {
        if masks.len() != scores.len() {
            return Err(shape_err("one score per group required"));
        }
        if let Some(d) = masks.first().map(Vec::len) {
            if masks.iter().any(|m| m.len() != d) {
                return Err(shape_err("group masks differ in length"));
            }
        }
        if masks
            .iter()
            .flatten()
            .chain(&scores)
            .any(|v| !v.is_finite())
        {
            return Err(domain_err("grouped attribution has non-finite entries"));
        }
        Ok(Self { masks, scores })
    }

    /// Binary groups given as feature index lists over `d` features.
    pub fn from_sets(d: usize, sets: &[Vec<usize>], scores: Vec<f64>) -> Result<Self> {
        let mut masks = Vec::with_capacity(sets.len());
        for set in sets {
            let mut m = vec![0.0; d];
            for &f in set {
                if f >= d {
                    return Err(domain_err(format!("feature {f} out of range for d = {d}")));
                }
                m[f] = 1.0;
            }
            masks.push(m);
        }
        Self::new(masks, scores)
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.masks.first().map_or(0, Vec::len)
    }

    /// Feature indices with positive mask weight, per group.
    pub fn members(&self) -> Vec<Vec<usize>> {
        self.masks
            .iter()
            .map(|m| (0..m.len()).filter(|&f| m[f] > 0.0).collect())
            .collect()
    }

    /// Group indices sorted by descending score; ties keep group order.
    pub fn order_by_score(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.scores[b].total_cmp(&self.scores[a]));
        order
    }
}

/// Per-feature attribution `alpha = sum_i c_i S_i`.
pub fn flatten_grouped(groups: &ScoredGroups) -> Vec<f64> {
    let mut alpha = vec![0.0; groups.n_features()];
    for (mask, &c) in groups.masks.iter().zip(&groups.scores) {
        for (a, &m) in alpha.iter_mut().zip(mask) {
            *a += c * m;
        }
    }
    alpha
}

/// Mean fraction of active features `|S_i| / d` over groups with strictly positive score.
pub fn sparsity(groups: &ScoredGroups) -> Result<f64> {
    if groups.is_empty() {
        return Err(domain_err("sparsity of an attribution with no groups"));
    }
    let d = groups.n_features();
    if d == 0 {
        return Err(domain_err("sparsity of groups over zero features"));
    }
    let fractions: Vec<f64> = groups
        .members()
        .iter()
        .zip(&groups.scores)
        .filter(|(_, &c)| c > 0.0)
        .map(|(m, _)| m.len() as f64 / d as f64)
        .collect();
    if fractions.is_empty() {
        return Err(domain_err("no group has a positive score"));
    }
    Ok(fractions.iter().sum::<f64>() / fractions.len() as f64)
}
