use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::certificates::{
    fit_exponential, max_grouped_errors, min_deletion_error_monomial, min_insertion_error_binomial,
    symmetric_monomial_deletion, zero_attribution_monomial_insertion, ExponentialFit,
    PolynomialSpec, MAX_PROGRAM_DIM,
};
use crate::error::{domain_err, Result};
use crate::runner::config::{CertifyConfig, CertifyFamily, PolynomialKind, RunConfig};
use crate::runner::{emit, fmt_num, to_stable_json, RunOutcome};

const EXACT_TOL: f64 = 1e-9;
const CROSS_CHECK_TOL: f64 = 1e-6;

struct Point {
    d: usize,
    value: f64,
    method: &'static str,
    /// Lower bound from the dual solution, or the cross-check value.
    check: Option<f64>,
}

fn dims(cfg: &CertifyConfig) -> Result<Vec<usize>> {
    if cfg.d_min > cfg.d_max {
        return Err(domain_err(format!(
            "d_min {} exceeds d_max {}",
            cfg.d_min, cfg.d_max
        )));
    }
    let binomial = cfg.family == CertifyFamily::Binomial
        || (cfg.family == CertifyFamily::Grouped
            && cfg.polynomial == Some(PolynomialKind::Binomial));
    let ds: Vec<usize> = (cfg.d_min..=cfg.d_max)
        .filter(|d| !binomial || d % 3 == 0)
        .collect();
    if ds.is_empty() {
        return Err(domain_err("the d range selects no dimensions"));
    }
    Ok(ds)
}

fn monomial_point(d: usize) -> Result<Point> {
    let (scan, _) = symmetric_monomial_deletion(d)?;
    if d > MAX_PROGRAM_DIM {
        return Ok(Point {
            d,
            value: scan,
            method: "symmetric_scan",
            check: None,
        });
    }
    let lp = min_deletion_error_monomial(d)?;
    Ok(Point {
        d,
        value: lp.value,
        method: "lp",
        check: Some(scan),
    })
}

fn binomial_point(d: usize) -> Result<Point> {
    let lp = min_insertion_error_binomial(d)?;
    Ok(Point {
        d,
        value: lp.value,
        method: "lp",
        check: Some(lp.lower_bound),
    })
}

fn fit_json(fit: &ExponentialFit) -> Value {
    json!({
        "slope": fit.slope,
        "intercept": fit.intercept,
        "offset": fit.offset,
        "relative_abs_error": fit.relative_abs_error,
    })
}

/// Runs the requested certificate family over `d_min..=d_max` and writes `results.json`
/// and `curves.csv`.
pub fn cmd_certify(config: &RunConfig, out: &Path) -> Result<RunOutcome> {
    let cfg = config.section(&config.certify, "certify")?;
    let ds = dims(cfg)?;
    let mut notes = Vec::new();
    let mut passed = true;
    let mut artifacts = Vec::new();
    let mut gate = |ok: bool, note: String, notes: &mut Vec<String>| {
        passed &= ok;
        notes.push(format!("[{}] {note}", if ok { "PASS" } else { "FAIL" }));
    };

    let family = serde_json::to_value(cfg.family)?;
    let results = match cfg.family {
        CertifyFamily::Monomial | CertifyFamily::Binomial => {
            let points = ds
                .par_iter()
                .map(|&d| match cfg.family {
                    CertifyFamily::Monomial => monomial_point(d),
                    _ => binomial_point(d),
                })
                .collect::<Result<Vec<_>>>()?;
            for p in &points {
                if let Some(check) = p.check {
                    let ok = (p.value - check).abs() <= CROSS_CHECK_TOL * (1.0 + p.value.abs());
                    gate(
                        ok,
                        format!("d={} value {} vs check {}", p.d, p.value, check),
                        &mut notes,
                    );
                }
            }
            let pairs: Vec<(f64, f64)> = points.iter().map(|p| (p.d as f64, p.value)).collect();
            let with_offset = cfg
                .with_offset
                .unwrap_or(cfg.family == CertifyFamily::Binomial);
            let fit = if pairs.len() >= 3 {
                Some(fit_exponential(&pairs, with_offset)?)
            } else {
                None
            };
            if let (Some(target), Some(fit)) = (cfg.slope_target, &fit) {
                let ok = (fit.slope - target).abs() <= cfg.slope_tolerance;
                gate(
                    ok,
                    format!(
                        "slope {} within {} of {target}",
                        fit.slope, cfg.slope_tolerance
                    ),
                    &mut notes,
                );
            }
            let mut csv = String::from("d,value,fitted\n");
            for p in &points {
                let fitted = fit.map_or(String::new(), |f| fmt_num(f.predict(p.d as f64)));
                csv.push_str(&format!("{},{},{fitted}\n", p.d, fmt_num(p.value)));
            }
            emit(out, "curves.csv", &csv, &mut artifacts)?;
            json!({
                "family": family,
                "points": points.iter().map(|p| json!([p.d, p.value])).collect::<Vec<_>>(),
                "methods": points.iter().map(|p| p.method).collect::<Vec<_>>(),
                "checks": points.iter().map(|p| p.check).collect::<Vec<_>>(),
                "fit": fit.as_ref().map(fit_json),
            })
        }
        CertifyFamily::ZeroAttribution => {
            let mut points = Vec::new();
            let mut csv = String::from("d,value\n");
            for &d in &ds {
                let v = zero_attribution_monomial_insertion(d)?;
                gate(
                    (v - 1.0).abs() <= EXACT_TOL,
                    format!("d={d} insertion error {v}"),
                    &mut notes,
                );
                csv.push_str(&format!("{d},{}\n", fmt_num(v)));
                points.push(json!([d, v]));
            }
            emit(out, "curves.csv", &csv, &mut artifacts)?;
            json!({"family": family, "points": points})
        }
        CertifyFamily::Grouped => {
            let kind = cfg.polynomial.unwrap_or(PolynomialKind::Monomial);
            let mut maxima = Vec::new();
            let mut csv = String::from("d,max_deletion,max_insertion\n");
            for &d in &ds {
                let spec = match kind {
                    PolynomialKind::Monomial => PolynomialSpec::monomial(d)?,
                    PolynomialKind::Binomial => PolynomialSpec::binomial(d)?,
                };
                let (del, ins) = max_grouped_errors(&spec)?;
                let ok = del == 0.0 && ins == 0.0;
                gate(
                    ok,
                    format!("d={d} grouped maxima ({del}, {ins})"),
                    &mut notes,
                );
                csv.push_str(&format!("{d},{},{}\n", fmt_num(del), fmt_num(ins)));
                maxima.push(json!({"d": d, "deletion": del, "insertion": ins}));
            }
            emit(out, "curves.csv", &csv, &mut artifacts)?;
            json!({"family": family, "polynomial": kind, "maxima": maxima})
        }
    };
    let mut results = results;
    results["passed"] = json!(passed);
    results["notes"] = json!(notes);
    emit(
        out,
        "results.json",
        &to_stable_json(&results)?,
        &mut artifacts,
    )?;
    Ok(RunOutcome {
        passed,
        artifacts,
        notes,
    })
}
