use serde::{Deserialize, Serialize};

use crate::error::{domain_err, shape_err, Result};
use crate::math::activation::{softmax, sparsemax};
use crate::math::matrix::DenseMatrix;

/// Row normalizer applied to attention scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalizer {
    Softmax,
    Sparsemax,
}

impl Normalizer {
    pub fn apply(self, v: &[f64]) -> Result<Vec<f64>> {
        match self {
            Normalizer::Softmax => softmax(v),
            Normalizer::Sparsemax => sparsemax(v),
        }
    }
}

/// Raw scaled scores `Q K^T / scale` (m x n for Q: m x p, K: n x p).
pub fn attention_scores(q: &DenseMatrix, k: &DenseMatrix, scale: f64) -> Result<DenseMatrix> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(domain_err(format!(
            "attention scale must be positive, got {scale}"
        )));
    }
    if q.cols() != k.cols() {
        return Err(shape_err(format!(
            "query width {} does not match key width {}",
            q.cols(),
            k.cols()
        )));
    }
    let raw = q.matmul_t(k)?;
    DenseMatrix::new(
        raw.rows(),
        raw.cols(),
        raw.data().iter().map(|s| s / scale).collect(),
    )
}

/// Attention weights: row `i` is `normalizer(Q_i K^T / scale)`, so every row lies on the simplex.
pub fn attention_weights(
    q: &DenseMatrix,
    k: &DenseMatrix,
    scale: f64,
    normalizer: Normalizer,
) -> Result<DenseMatrix> {
    let scores = attention_scores(q, k, scale)?;
    let mut data = Vec::with_capacity(scores.rows() * scores.cols());
    for row in scores.iter_rows() {
        data.extend(normalizer.apply(row)?);
    }
    DenseMatrix::new(scores.rows(), scores.cols(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_queries_give_identity_under_sparsemax() {
        let eye = DenseMatrix::identity(2);
        let w = attention_weights(&eye, &eye, 1.0, Normalizer::Sparsemax).unwrap();
        assert_eq!(w, eye);
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let q = DenseMatrix::from_rows(&[vec![0.3, -1.2, 2.0], vec![5.0, 0.1, 0.0]]).unwrap();
        let k = DenseMatrix::from_rows(&[
            vec![1.0, 0.0, 0.5],
            vec![-2.0, 1.0, 0.0],
            vec![0.0, 0.0, 3.0],
            vec![0.7, 0.7, 0.7],
        ])
        .unwrap();
        let w = attention_weights(&q, &k, 1.7, Normalizer::Softmax).unwrap();
        assert_eq!(w.shape(), (2, 4));
        for row in w.iter_rows() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(row.iter().all(|&x| x > 0.0));
        }
    }

    #[test]
    fn single_query_row_reduces_to_sparsemax() {
        let q = DenseMatrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let k = DenseMatrix::from_rows(&[vec![0.1, 0.2], vec![0.3, -0.1], vec![0.0, 0.4]]).unwrap();
        let w = attention_weights(&q, &k, 2.0, Normalizer::Sparsemax).unwrap();
        let direct = sparsemax(&[0.5 / 2.0, 0.1 / 2.0, 0.8 / 2.0]).unwrap();
        for (a, b) in w.row(0).iter().zip(&direct) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_shapes_and_scales() {
        let q = DenseMatrix::identity(2);
        let k = DenseMatrix::identity(3);
        assert!(attention_weights(&q, &k, 1.0, Normalizer::Softmax).is_err());
        assert!(attention_weights(&q, &q, 0.0, Normalizer::Softmax).is_err());
        assert!(attention_weights(&q, &q, -1.0, Normalizer::Sparsemax).is_err());
    }
}
