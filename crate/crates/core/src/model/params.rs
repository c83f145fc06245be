use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Result};
use crate::math::DenseMatrix;

/// Default number of group-generator heads.
pub const DEFAULT_HEADS: usize = 2;

/// Standard deviation of the Gaussian used to initialize the attention projections.
pub const INIT_STD: f64 = 0.02;

/// Width of a segment token: its pooled value followed by a one-hot segment position.
pub fn token_dim(n_segments: usize) -> usize {
    n_segments + 1
}

/// Query/key projections of one group-generator head, each `key_dim x token_dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadWeights {
    pub w_q: DenseMatrix,
    pub w_k: DenseMatrix,
}

/// Parameters of the group generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupGenParams {
    heads: Vec<HeadWeights>,
}

impl GroupGenParams {
    pub fn new(heads: Vec<HeadWeights>) -> Result<Self> {
        let first = heads
            .first()
            .ok_or_else(|| shape_err("at least one head required"))?;
        let shape = first.w_q.shape();
        if heads
            .iter()
            .any(|h| h.w_q.shape() != shape || h.w_k.shape() != shape)
        {
            return Err(shape_err("all head projections must share one shape"));
        }
        Ok(Self { heads })
    }

    pub fn random<R: Rng + ?Sized>(
        n_heads: usize,
        n_segments: usize,
        key_dim: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let normal = Normal::new(0.0, INIT_STD).expect("valid std");
        let p = token_dim(n_segments);
        let heads = (0..n_heads)
            .map(|_| HeadWeights {
                w_q: DenseMatrix::from_fn(key_dim, p, |_, _| normal.sample(rng)),
                w_k: DenseMatrix::from_fn(key_dim, p, |_, _| normal.sample(rng)),
            })
            .collect();
        Self::new(heads)
    }

    pub fn heads(&self) -> &[HeadWeights] {
        &self.heads
    }

    pub fn heads_mut(&mut self) -> &mut [HeadWeights] {
        &mut self.heads
    }

    pub fn n_heads(&self) -> usize {
        self.heads.len()
    }

    pub fn key_dim(&self) -> usize {
        self.heads[0].w_q.rows()
    }

    pub fn token_dim(&self) -> usize {
        self.heads[0].w_q.cols()
    }

    pub(crate) fn check_segments(&self, n_segments: usize) -> Result<()> {
        if self.token_dim() != token_dim(n_segments) {
            return Err(shape_err(format!(
                "generator expects tokens of width {}, segmentation gives {}",
                self.token_dim(),
                token_dim(n_segments)
            )));
        }
        Ok(())
    }
}

/// Parameters of the group selector: query/key projections (`h x h`) and the class
/// value weights `C` (`n_classes x h`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSelectParams {
    pub w_q: DenseMatrix,
    pub w_k: DenseMatrix,
    pub c: DenseMatrix,
}

impl GroupSelectParams {
    pub fn new(w_q: DenseMatrix, w_k: DenseMatrix, c: DenseMatrix) -> Result<Self> {
        let h = c.cols();
        if w_q.shape() != (h, h) || w_k.shape() != (h, h) {
            return Err(shape_err(format!(
                "selector projections must be {h}x{h}, got {:?} and {:?}",
                w_q.shape(),
                w_k.shape()
            )));
        }
        Ok(Self { w_q, w_k, c })
    }

    /// Gaussian projections with `C` copied from the backbone's classifier.
    pub fn random<R: Rng + ?Sized>(classifier: &DenseMatrix, rng: &mut R) -> Result<Self> {
        let normal = Normal::new(0.0, INIT_STD).expect("valid std");
        let h = classifier.cols();
        let w_q = DenseMatrix::from_fn(h, h, |_, _| normal.sample(rng));
        let w_k = DenseMatrix::from_fn(h, h, |_, _| normal.sample(rng));
        Self::new(w_q, w_k, classifier.clone())
    }

    pub fn embed_dim(&self) -> usize {
        self.c.cols()
    }

    pub fn n_classes(&self) -> usize {
        self.c.rows()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = GroupGenParams::random(2, 4, 3, &mut rng).unwrap();
        assert_eq!(g.n_heads(), 2);
        assert_eq!(g.heads()[1].w_k.shape(), (3, 5));
        assert!(g.check_segments(4).is_ok());
        assert!(g.check_segments(3).is_err());
    }

    #[test]
    fn selector_shapes_checked() {
        let c = DenseMatrix::zeros(2, 3);
        assert!(
            GroupSelectParams::new(DenseMatrix::identity(3), DenseMatrix::identity(2), c).is_err()
        );
    }

    #[test]
    fn zero_heads_rejected() {
        assert!(GroupGenParams::new(vec![]).is_err());
    }
}
