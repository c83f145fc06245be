use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Result};

/// Assignment of each input feature to exactly one segment; every segment is non-empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Segmentation {
    n_segments: usize,
    assignment: Vec<usize>,
    members: Vec<Vec<usize>>,
}

impl Segmentation {
    /// Segment count is inferred as `max(assignment) + 1`.
    pub fn new(assignment: Vec<usize>) -> Result<Self> {
        let n_segments = assignment.iter().max().map_or(0, |m| m + 1);
        Self::with_count(n_segments, assignment)
    }

    pub fn with_count(n_segments: usize, assignment: Vec<usize>) -> Result<Self> {
        if assignment.is_empty() {
            return Err(shape_err("segmentation covers no features"));
        }
        let mut members = vec![Vec::new(); n_segments];
        for (feature, &seg) in assignment.iter().enumerate() {
            if seg >= n_segments {
                return Err(shape_err(format!(
                    "feature {feature} assigned to segment {seg}, but only {n_segments} segments exist"
                )));
            }
            members[seg].push(feature);
        }
        if let Some(empty) = members.iter().position(Vec::is_empty) {
            return Err(shape_err(format!("segment {empty} has no features")));
        }
        Ok(Self {
            n_segments,
            assignment,
            members,
        })
    }

    /// Contiguous 1-D patches of `patch_size` features (the last patch may be shorter).
    pub fn patches(d: usize, patch_size: usize) -> Result<Self> {
        if patch_size == 0 {
            return Err(shape_err("patch size must be positive"));
        }
        Self::new((0..d).map(|i| i / patch_size).collect())
    }

    /// Square patches over a row-major `height x width` grid.
    pub fn grid_patches(height: usize, width: usize, patch: usize) -> Result<Self> {
        if patch == 0 {
            return Err(shape_err("patch size must be positive"));
        }
        let per_row = width.div_ceil(patch);
        let assignment = (0..height * width)
            .map(|i| (i / width / patch) * per_row + (i % width) / patch)
            .collect();
        Self::new(assignment)
    }

    pub fn n_segments(&self) -> usize {
        self.n_segments
    }

    pub fn n_features(&self) -> usize {
        self.assignment.len()
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn segment_of(&self, feature: usize) -> usize {
        self.assignment[feature]
    }

    pub fn members(&self, segment: usize) -> &[usize] {
        &self.members[segment]
    }

    /// Per-segment mean of `x`.
    pub fn pool(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self
            .members
            .iter()
            .map(|m| m.iter().map(|&f| x[f]).sum::<f64>() / m.len() as f64)
            .collect())
    }

    /// Feature-level mask from segment-level weights.
    pub fn broadcast(&self, segment_weights: &[f64]) -> Vec<f64> {
        self.assignment
            .iter()
            .map(|&s| segment_weights[s])
            .collect()
    }

    /// Sums feature-level values back onto segments (adjoint of [`Self::broadcast`]).
    pub fn reduce(&self, feature_values: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_segments];
        for (&s, &v) in self.assignment.iter().zip(feature_values) {
            out[s] += v;
        }
        out
    }

    pub(crate) fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_features() {
            return Err(shape_err(format!(
                "input has {} features but segmentation covers {}",
                x.len(),
                self.n_features()
            )));
        }
        Ok(())
    }
}

impl TryFrom<Vec<usize>> for Segmentation {
    type Error = crate::SopError;

    fn try_from(assignment: Vec<usize>) -> Result<Self> {
        Self::new(assignment)
    }
}

impl From<Segmentation> for Vec<usize> {
    fn from(s: Segmentation) -> Self {
        s.assignment
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn patches_cover_features() {
        let s = Segmentation::patches(5, 2).unwrap();
        assert_eq!(s.n_segments(), 3);
        assert_eq!(s.assignment(), &[0, 0, 1, 1, 2]);
        assert_eq!(
            s.pool(&[1.0, 3.0, 2.0, 2.0, 7.0]).unwrap(),
            vec![2.0, 2.0, 7.0]
        );
    }

    #[test]
    fn grid_patches_layout() {
        let s = Segmentation::grid_patches(4, 4, 2).unwrap();
        assert_eq!(s.n_segments(), 4);
        assert_eq!(&s.assignment()[..8], &[0, 0, 1, 1, 0, 0, 1, 1]);
        assert_eq!(&s.assignment()[8..], &[2, 2, 3, 3, 2, 2, 3, 3]);
    }

    #[test]
    fn rejects_empty_segments() {
        assert!(Segmentation::with_count(3, vec![0, 2, 2]).is_err());
        assert!(Segmentation::new(vec![]).is_err());
    }

    #[test]
    fn broadcast_reduce_are_adjoint() {
        let s = Segmentation::new(vec![1, 0, 1, 2]).unwrap();
        let w = [0.5, -1.0, 2.0];
        let v = [1.0, 2.0, 3.0, 4.0];
        let lhs: f64 = s.broadcast(&w).iter().zip(&v).map(|(a, b)| a * b).sum();
        let rhs: f64 = s.reduce(&v).iter().zip(&w).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-12);
    }
}
