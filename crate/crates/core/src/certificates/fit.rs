use serde::{Deserialize, Serialize};

use crate::error::{domain_err, Result};

/// Step of the offset grid.
pub const OFFSET_STEP: f64 = 0.01;

/// `value ~ exp(slope * d + intercept) + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialFit {
    pub slope: f64,
    pub intercept: f64,
    pub offset: Option<f64>,
    /// `sum |fit - v| / sum |v - mean(v)|`.
    pub relative_abs_error: f64,
}

impl ExponentialFit {
    pub fn predict(&self, d: f64) -> f64 {
        (self.slope * d + self.intercept).exp() + self.offset.unwrap_or(0.0)
    }
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

fn relative_abs_error(points: &[(f64, f64)], fit: &ExponentialFit) -> f64 {
    let mean = points.iter().map(|p| p.1).sum::<f64>() / points.len() as f64;
    let num: f64 = points
        .iter()
        .map(|&(d, v)| (fit.predict(d) - v).abs())
        .sum();
    let den: f64 = points.iter().map(|&(_, v)| (v - mean).abs()).sum();
    if den > 0.0 {
        num / den
    } else {
        num / points
            .iter()
            .map(|p| p.1.abs())
            .sum::<f64>()
            .max(f64::MIN_POSITIVE)
    }
}

fn fit_with(points: &[(f64, f64)], offset: f64) -> Result<(f64, f64)> {
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let mut ys = Vec::with_capacity(points.len());
    for &(d, v) in points {
        let shifted = v - offset;
        if shifted <= 0.0 {
            return Err(domain_err(format!(
                "value {v} at d = {d} is not above the offset {offset}"
            )));
        }
        ys.push(shifted.ln());
    }
    Ok(least_squares(&xs, &ys))
}

/// Least squares on `(d, ln(value - offset))`.
///
/// With `with_offset`, offsets `0, 0.01, 0.02, ...` below the smallest value are tried and
/// the one with the lowest relative absolute error wins (ties go to the smaller offset).
pub fn fit_exponential(points: &[(f64, f64)], with_offset: bool) -> Result<ExponentialFit> {
    if points.len() < 3 {
        return Err(domain_err(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return Err(domain_err("fit points must be finite"));
    }
    let first = points[0].0;
    if points.iter().all(|p| p.0 == first) {
        return Err(domain_err("fit needs at least two distinct abscissae"));
    }
    let build = |offset: f64| -> Result<ExponentialFit> {
        let (slope, intercept) = fit_with(points, offset)?;
        let mut fit = ExponentialFit {
            slope,
            intercept,
            offset: with_offset.then_some(offset),
            relative_abs_error: 0.0,
        };
        fit.relative_abs_error = relative_abs_error(points, &fit);
        Ok(fit)
    };
    let mut best = build(0.0)?;
    if with_offset {
        let min_value = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let mut k = 1u32;
        loop {
            let offset = f64::from(k) * OFFSET_STEP;
            if offset >= min_value {
                break;
            }
            let fit = build(offset)?;
            if fit.relative_abs_error < best.relative_abs_error {
                best = fit;
            }
            k += 1;
        }
    }
    Ok(best)
}
