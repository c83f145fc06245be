use crate::error::{domain_err, Result};

/// Central-difference gradient of `f` at `x`. Test oracle only.
pub fn finite_diff_grad<F>(f: F, x: &[f64], step: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    if !(step > 0.0 && step.is_finite()) {
        return Err(domain_err(format!(
            "finite-difference step must be positive, got {step}"
        )));
    }
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let orig = probe[i];
        probe[i] = orig + step;
        let plus = f(&probe);
        probe[i] = orig - step;
        let minus = f(&probe);
        probe[i] = orig;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(domain_err(format!(
                "non-finite function value while differencing coordinate {i}"
            )));
        }
        grad.push((plus - minus) / (2.0 * step));
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_and_constant() {
        let g = finite_diff_grad(|x| x.iter().map(|v| v * v).sum(), &[1.0, 2.0], 1e-5).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-6 && (g[1] - 4.0).abs() < 1e-6);
        let g = finite_diff_grad(|_| 3.5, &[1.0, -2.0, 0.0], 1e-4).unwrap();
        assert_eq!(g, vec![0.0; 3]);
    }

    #[test]
    fn non_finite_is_an_error() {
        let r = finite_diff_grad(|x| x[0].ln(), &[0.0], 1e-3);
        assert!(r.is_err());
        assert!(finite_diff_grad(|x| x[0], &[0.0], 0.0).is_err());
    }
}
