//! Softmax and sparsemax on real vectors, plus the sparsemax vector-Jacobian product.

use crate::error::{Result, SopError};
use crate::math::matrix::check_finite;

fn check_input(v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(SopError::Length("empty input vector".into()));
    }
    check_finite(v)
}

/// Numerically stable softmax (max-shifted).
pub fn softmax(v: &[f64]) -> Result<Vec<f64>> {
    check_input(v)?;
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = v.iter().map(|x| (x - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / total).collect())
}

/// Threshold `tau` such that `sparsemax(v)_i = max(v_i - tau, 0)`.
///
/// Sort-and-threshold: with `z` sorted descending, the support size is the largest `k`
/// with `1 + k z_k > z_1 + ... + z_k`.
pub fn sparsemax_threshold(v: &[f64]) -> Result<f64> {
    check_input(v)?;
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut support_sum = sorted[0];
    let mut support = 1usize;
    for (idx, &z) in sorted.iter().enumerate() {
        cumsum += z;
        let k = (idx + 1) as f64;
        if 1.0 + k * z > cumsum {
            support = idx + 1;
            support_sum = cumsum;
        }
    }
    Ok((support_sum - 1.0) / support as f64)
}

/// Euclidean projection of `v` onto the probability simplex.
pub fn sparsemax(v: &[f64]) -> Result<Vec<f64>> {
    let tau = sparsemax_threshold(v)?;
    let mut out: Vec<f64> = v.iter().map(|&x| (x - tau).clamp(0.0, 1.0)).collect();
    // a single survivor is exactly one, not 1 - ulp
    let mut positive = out.iter_mut().filter(|p| **p > 0.0);
    if let (Some(only), None) = (positive.next(), positive.next()) {
        *only = 1.0;
    }
    Ok(out)
}

/// `J^T * upstream` for the sparsemax Jacobian at `v`.
///
/// On the support `Q` the Jacobian is `I - 11^T/|Q|`, zero elsewhere. At support-change
/// points this is the Jacobian of the current support, a valid generalized Jacobian.
pub fn sparsemax_vjp(v: &[f64], upstream: &[f64]) -> Result<Vec<f64>> {
    if v.len() != upstream.len() {
        return Err(SopError::Shape(format!(
            "sparsemax_vjp: input length {} but upstream length {}",
            v.len(),
            upstream.len()
        )));
    }
    let p = sparsemax(v)?;
    Ok(sparsemax_vjp_from_output(&p, upstream))
}

/// Same as [`sparsemax_vjp`] when the forward output is already at hand.
pub fn sparsemax_vjp_from_output(output: &[f64], upstream: &[f64]) -> Vec<f64> {
    let (count, sum) = output
        .iter()
        .zip(upstream)
        .filter(|(p, _)| **p > 0.0)
        .fold((0usize, 0.0), |(n, s), (_, u)| (n + 1, s + u));
    let mean = if count > 0 { sum / count as f64 } else { 0.0 };
    output
        .iter()
        .zip(upstream)
        .map(|(&p, &u)| if p > 0.0 { u - mean } else { 0.0 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn sparsemax_examples() {
        assert_eq!(sparsemax(&[0.3, 0.3]).unwrap(), vec![0.5, 0.5]);
        assert_eq!(sparsemax(&[1.0, 0.0]).unwrap(), vec![1.0, 0.0]);
        assert!(close(
            &sparsemax(&[0.5, 0.2]).unwrap(),
            &[0.65, 0.35],
            1e-12
        ));
        assert!((sparsemax_threshold(&[0.5, 0.2]).unwrap() + 0.15).abs() < 1e-12);
    }

    #[test]
    fn sparsemax_errors() {
        assert!(matches!(sparsemax(&[]), Err(SopError::Length(_))));
        assert!(matches!(
            sparsemax(&[1.0, f64::INFINITY]),
            Err(SopError::Domain(_))
        ));
        assert!(matches!(
            sparsemax_vjp(&[1.0, 2.0], &[1.0]),
            Err(SopError::Shape(_))
        ));
    }

    #[test]
    fn vjp_examples() {
        // full support annihilates constants
        let g = sparsemax_vjp(&[0.4, 0.6], &[1.0, 1.0]).unwrap();
        assert!(close(&g, &[0.0, 0.0], 1e-15));
        // singleton support
        assert_eq!(
            sparsemax_vjp(&[10.0, -10.0], &[1.0, 1.0]).unwrap(),
            vec![0.0, 0.0]
        );
        let g = sparsemax_vjp(&[0.4, 0.6, -3.0], &[1.0, 0.0, 5.0]).unwrap();
        assert!(close(&g, &[0.5, -0.5, 0.0], 1e-15));
    }

    #[test]
    fn softmax_examples() {
        assert_eq!(softmax(&[0.0, 0.0]).unwrap(), vec![0.5, 0.5]);
        let p = softmax(&[2f64.ln(), 0.0]).unwrap();
        assert!(close(&p, &[2.0 / 3.0, 1.0 / 3.0], 1e-15));
        let p = softmax(&[1000.0, 0.0]).unwrap();
        assert!(p.iter().all(|x| x.is_finite()));
        assert_eq!(p[0], 1.0);
        assert!(p[1] < 1e-300);
        assert!(matches!(softmax(&[]), Err(SopError::Length(_))));
    }

    #[test]
    fn one_hot_when_gap_at_least_one() {
        let p = sparsemax(&[0.2, 3.0, 1.9, -4.0]).unwrap();
        assert_eq!(p, vec![0.0, 1.0, 0.0, 0.0]);
    }
}
