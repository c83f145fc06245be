//! Minimum per-feature attribution error on monomials and binomials, and the exponential
//! trend of those minima.
//!
//! cargo run --release --example certify_bounds

use std::time::Instant;

use sop_core::certificates::{
    fit_exponential, max_grouped_errors, min_deletion_error_monomial, min_insertion_error_binomial,
    symmetric_monomial_deletion, PolynomialSpec,
};

fn main() -> sop_core::Result<()> {
    println!("monomial deletion");
    let mut points = Vec::new();
    for d in 2..=14 {
        let t = Instant::now();
        let lp = min_deletion_error_monomial(d)?;
        let (scan, a) = symmetric_monomial_deletion(d)?;
        println!(
            "  d={d:2}  lp={:10.4}  scan={scan:10.4} (a=1/{:.0})  iters={:5}  {:?}",
            lp.value,
            1.0 / a,
            lp.iterations,
            t.elapsed()
        );
        points.push((d as f64, lp.value));
    }
    let fit = fit_exponential(&points, false)?;
    println!(
        "  fit slope={:.4} intercept={:.4} rae={:.4}",
        fit.slope, fit.intercept, fit.relative_abs_error
    );

    println!("binomial insertion");
    let mut points = Vec::new();
    for d in [3, 6, 9, 12, 15] {
        let t = Instant::now();
        let lp = min_insertion_error_binomial(d)?;
        println!(
            "  d={d:2}  lp={:10.4}  iters={:5}  {:?}",
            lp.value,
            lp.iterations,
            t.elapsed()
        );
        points.push((d as f64, lp.value));
    }
    let fit = fit_exponential(&points, true)?;
    println!(
        "  fit slope={:.4} intercept={:.4} offset={:?} rae={:.4}",
        fit.slope, fit.intercept, fit.offset, fit.relative_abs_error
    );

    let (del, _) = max_grouped_errors(&PolynomialSpec::monomial(8)?)?;
    let (_, ins) = max_grouped_errors(&PolynomialSpec::binomial(9)?)?;
    println!("grouped attributions: monomial deletion max {del}, binomial insertion max {ins}");
    Ok(())
}
