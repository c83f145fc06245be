use crate::error::{domain_err, Result, SopError};

fn check(x: &[f64], rationale: &[f64]) -> Result<()> {
    if x.len() != rationale.len() {
        return Err(SopError::Shape(format!(
            "rationale has length {}, input has {}",
            rationale.len(),
            x.len()
        )));
    }
    if rationale.iter().any(|&r| r != 0.0 && r != 1.0) {
        return Err(domain_err("rationale mask must be binary"));
    }
    Ok(())
}

fn class_prob(probs: Vec<f64>, class: usize) -> Result<f64> {
    probs.get(class).copied().ok_or_else(|| {
        domain_err(format!(
            "class {class} out of range for a model with {} outputs",
            probs.len()
        ))
    })
}

/// `m(x)_j - m(x with the rationale zeroed)_j`: how much the prediction needs the rationale.
pub fn comprehensiveness<M: Fn(&[f64]) -> Vec<f64>>(
    model: M,
    x: &[f64],
    rationale: &[f64],
    class: usize,
) -> Result<f64> {
    check(x, rationale)?;
    let removed: Vec<f64> = x
        .iter()
        .zip(rationale)
        .map(|(v, r)| v * (1.0 - r))
        .collect();
    Ok(class_prob(model(x), class)? - class_prob(model(&removed), class)?)
}

/// `m(x)_j - m(rationale only)_j`: low values mean the rationale alone suffices.
pub fn sufficiency<M: Fn(&[f64]) -> Vec<f64>>(
    model: M,
    x: &[f64],
    rationale: &[f64],
    class: usize,
) -> Result<f64> {
    check(x, rationale)?;
    let kept: Vec<f64> = x.iter().zip(rationale).map(|(v, r)| v * r).collect();
    Ok(class_prob(model(x), class)? - class_prob(model(&kept), class)?)
}
