use crate::certificates::l1::{solve_l1, L1Route, L1Solution};
use crate::certificates::polynomial::PolynomialSpec;
use crate::certificates::program::build_program;
use crate::error::{domain_err, Result, SopError};
use crate::faithfulness::{
    grouped_powerset_error, total_powerset_error, PerturbationKind, ScoredGroups,
};

/// Largest dimension for the symmetric monomial scan.
pub const MAX_SCAN_DIM: usize = 20;
/// Largest dimension for the exhaustive grouped check.
pub const MAX_GROUPED_DIM: usize = 12;

/// Best total deletion error of any per-feature attribution of `prod x_i` at `1_d`.
pub fn min_deletion_error_monomial(d: usize) -> Result<L1Solution> {
    if d < 2 {
        return Err(domain_err(format!("monomial bound needs d >= 2, got {d}")));
    }
    let program = build_program(&PolynomialSpec::monomial(d)?, PerturbationKind::Deletion)?;
    solve_l1(&program, L1Route::Dual)
}

/// Best total insertion error of any per-feature attribution of the binomial at `1_d`.
pub fn min_insertion_error_binomial(d: usize) -> Result<L1Solution> {
    let program = build_program(&PolynomialSpec::binomial(d)?, PerturbationKind::Insertion)?;
    solve_l1(&program, L1Route::Dual)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `min_a sum_{k>=1} C(d,k) |1 - k a|`, the monomial deletion program restricted to
/// uniform attributions. By symmetry and convexity the restriction loses nothing, and the
/// minimum sits at a breakpoint `a = 1/k`.
pub fn symmetric_monomial_deletion(d: usize) -> Result<(f64, f64)> {
    if d == 0 || d > MAX_SCAN_DIM {
        return Err(SopError::Capacity(format!(
            "symmetric scan supports 1 <= d <= {MAX_SCAN_DIM}, got {d}"
        )));
    }
    let objective = |a: f64| -> f64 {
        (1..=d)
            .map(|k| binomial(d, k) * (1.0 - k as f64 * a).abs())
            .sum()
    };
    let mut best = (objective(0.0), 0.0);
    for k in 1..=d {
        let a = 1.0 / k as f64;
        let v = objective(a);
        if v < best.0 {
            best = (v, a);
        }
    }
    Ok(best)
}

/// Total insertion error of the zero attribution for `prod x_i` at `x`.
pub fn zero_attribution_insertion_error_at(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(domain_err("need at least one feature"));
    }
    let zero = vec![0.0; x.len()];
    total_powerset_error(
        |v: &[f64]| v.iter().product(),
        x,
        &zero,
        PerturbationKind::Insertion,
    )
}

/// [`zero_attribution_insertion_error_at`] for `x = 1_d`.
pub fn zero_attribution_monomial_insertion(d: usize) -> Result<f64> {
    zero_attribution_insertion_error_at(&vec![1.0; d])
}

/// The grouped attribution that explains `spec` exactly: one group per term, score 1.
pub fn term_groups(spec: &PolynomialSpec) -> Result<ScoredGroups> {
    let terms = spec.terms();
    let scores = vec![1.0; terms.len()];
    ScoredGroups::from_sets(spec.d(), &terms, scores)
}

/// Maximum grouped deletion and insertion errors of [`term_groups`] at `1_d` over the
/// full powerset.
pub fn max_grouped_errors(spec: &PolynomialSpec) -> Result<(f64, f64)> {
    spec.validate()?;
    let d = spec.d();
    if d > MAX_GROUPED_DIM {
        return Err(SopError::Capacity(format!(
            "grouped check over d = {d} exceeds the limit of {MAX_GROUPED_DIM}"
        )));
    }
    let beta = term_groups(spec)?;
    let x = vec![1.0; d];
    let f = |v: &[f64]| spec.evaluate(v);
    let del = grouped_powerset_error(f, &x, &beta, PerturbationKind::Deletion)?;
    let ins = grouped_powerset_error(f, &x, &beta, PerturbationKind::Insertion)?;
    Ok((del.max, ins.max))
}
