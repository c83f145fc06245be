//! Deletion and insertion errors over feature subsets, per-feature and grouped.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain_err, Result, SopError};
use crate::faithfulness::grouped::ScoredGroups;

/// Largest dimension for which the full powerset is enumerated.
pub const MAX_POWERSET_DIM: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerturbationKind {
    Deletion,
    Insertion,
}

fn subset_mask(d: usize, subset: &[usize]) -> Result<Vec<bool>> {
    let mut mask = vec![false; d];
    for &i in subset {
        if i >= d {
            return Err(domain_err(format!(
                "feature index {i} out of range for d = {d}"
            )));
        }
        mask[i] = true;
    }
    Ok(mask)
}

/// `x` with the features in `subset` zeroed.
fn without(x: &[f64], subset: &[bool]) -> Vec<f64> {
    x.iter()
        .zip(subset)
        .map(|(&v, &s)| if s { 0.0 } else { v })
        .collect()
}

/// `x` keeping only the features in `subset`.
fn only(x: &[f64], subset: &[bool]) -> Vec<f64> {
    x.iter()
        .zip(subset)
        .map(|(&v, &s)| if s { v } else { 0.0 })
        .collect()
}

fn check_alpha(x: &[f64], alpha: &[f64]) -> Result<()> {
    if x.len() != alpha.len() {
        return Err(SopError::Shape(format!(
            "attribution has length {}, input has {}",
            alpha.len(),
            x.len()
        )));
    }
    if alpha.iter().any(|a| !a.is_finite()) {
        return Err(domain_err("attribution has non-finite entries"));
    }
    Ok(())
}

fn attributed(alpha: &[f64], subset: &[bool]) -> f64 {
    alpha
        .iter()
        .zip(subset)
        .filter(|(_, &s)| s)
        .map(|(a, _)| a)
        .sum()
}

fn del_err_mask<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], fx: f64, alpha: &[f64], s: &[bool]) -> f64 {
    (fx - f(&without(x, s)) - attributed(alpha, s)).abs()
}

fn ins_err_mask<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], f0: f64, alpha: &[f64], s: &[bool]) -> f64 {
    (f(&only(x, s)) - f0 - attributed(alpha, s)).abs()
}

/// `|f(x) - f(x without S) - sum_{i in S} alpha_i|`.
pub fn del_err<F: Fn(&[f64]) -> f64>(
    f: F,
    x: &[f64],
    alpha: &[f64],
    subset: &[usize],
) -> Result<f64> {
    check_alpha(x, alpha)?;
    let s = subset_mask(x.len(), subset)?;
    Ok(del_err_mask(&f, x, f(x), alpha, &s))
}

/// `|f(x_S) - f(0) - sum_{i in S} alpha_i|`.
pub fn ins_err<F: Fn(&[f64]) -> f64>(
    f: F,
    x: &[f64],
    alpha: &[f64],
    subset: &[usize],
) -> Result<f64> {
    check_alpha(x, alpha)?;
    let s = subset_mask(x.len(), subset)?;
    let f0 = f(&vec![0.0; x.len()]);
    Ok(ins_err_mask(&f, x, f0, alpha, &s))
}

fn bits(d: usize, code: usize) -> Vec<bool> {
    (0..d).map(|i| code >> i & 1 == 1).collect()
}

fn check_capacity(d: usize) -> Result<()> {
    if d > MAX_POWERSET_DIM {
        return Err(SopError::Capacity(format!(
            "powerset over {d} features exceeds the limit of {MAX_POWERSET_DIM}"
        )));
    }
    Ok(())
}

/// Sums `term(subset)` over the powerset in binary counting order (bit `i` = feature `i`).
/// Terms are evaluated in parallel and reduced sequentially, so the result does not
/// depend on the worker count.
fn sum_powerset<T>(d: usize, term: T) -> f64
where
    T: Fn(&[bool]) -> f64 + Sync,
{
    let values: Vec<f64> = (0..1usize << d)
        .into_par_iter()
        .map(|code| term(&bits(d, code)))
        .collect();
    values.iter().sum()
}

fn max_powerset<T>(d: usize, term: T) -> f64
where
    T: Fn(&[bool]) -> f64 + Sync,
{
    (0..1usize << d)
        .into_par_iter()
        .map(|code| term(&bits(d, code)))
        .reduce(|| 0.0, f64::max)
}

/// Total deletion or insertion error over every subset of features.
pub fn total_powerset_error<F>(
    f: F,
    x: &[f64],
    alpha: &[f64],
    kind: PerturbationKind,
) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    check_alpha(x, alpha)?;
    let d = x.len();
    check_capacity(d)?;
    Ok(match kind {
        PerturbationKind::Deletion => {
            let fx = f(x);
            sum_powerset(d, |s| del_err_mask(&f, x, fx, alpha, s))
        }
        PerturbationKind::Insertion => {
            let f0 = f(&vec![0.0; d]);
            sum_powerset(d, |s| ins_err_mask(&f, x, f0, alpha, s))
        }
    })
}

struct GroupSets {
    members: Vec<Vec<usize>>,
    scores: Vec<f64>,
}

impl GroupSets {
    fn new(x: &[f64], beta: &ScoredGroups) -> Result<Self> {
        if !beta.is_empty() && beta.n_features() != x.len() {
            return Err(SopError::Shape(format!(
                "groups cover {} features, input has {}",
                beta.n_features(),
                x.len()
            )));
        }
        Ok(Self {
            members: beta.members(),
            scores: beta.scores.clone(),
        })
    }

    /// Score mass of groups touched by the deleted set.
    fn deleted_mass(&self, s: &[bool]) -> f64 {
        self.members
            .iter()
            .zip(&self.scores)
            .filter(|(m, _)| m.iter().any(|&f| s[f]))
            .map(|(_, c)| c)
            .sum()
    }

    /// Score mass of non-empty groups fully contained in the inserted set.
    fn inserted_mass(&self, s: &[bool]) -> f64 {
        self.members
            .iter()
            .zip(&self.scores)
            .filter(|(m, _)| !m.is_empty() && m.iter().all(|&f| s[f]))
            .map(|(_, c)| c)
            .sum()
    }
}

/// `|f(x) - f(x without S) - sum of c_i over groups intersecting S|`.
///
/// A group loses its score as soon as any of its members is deleted.
pub fn group_del_err<F: Fn(&[f64]) -> f64>(
    f: F,
    x: &[f64],
    beta: &ScoredGroups,
    subset: &[usize],
) -> Result<f64> {
    let sets = GroupSets::new(x, beta)?;
    let s = subset_mask(x.len(), subset)?;
    Ok((f(x) - f(&without(x, &s)) - sets.deleted_mass(&s)).abs())
}

/// `|f(x_S) - f(0) - sum of c_i over groups contained in S|`.
///
/// A group contributes its score once all of its members are inserted.
pub fn group_ins_err<F: Fn(&[f64]) -> f64>(
    f: F,
    x: &[f64],
    beta: &ScoredGroups,
    subset: &[usize],
) -> Result<f64> {
    let sets = GroupSets::new(x, beta)?;
    let s = subset_mask(x.len(), subset)?;
    Ok((f(&only(x, &s)) - f(&vec![0.0; x.len()]) - sets.inserted_mass(&s)).abs())
}

type SubsetTerm<'a> = dyn Fn(&[bool]) -> f64 + Sync + 'a;

/// Sum and maximum of a grouped error over the powerset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowersetSummary {
    pub total: f64,
    pub max: f64,
}

pub fn grouped_powerset_error<F>(
    f: F,
    x: &[f64],
    beta: &ScoredGroups,
    kind: PerturbationKind,
) -> Result<PowersetSummary>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let sets = GroupSets::new(x, beta)?;
    let d = x.len();
    check_capacity(d)?;
    let term: Box<SubsetTerm> = match kind {
        PerturbationKind::Deletion => {
            let fx = f(x);
            Box::new(move |s: &[bool]| (fx - f(&without(x, s)) - sets.deleted_mass(s)).abs())
        }
        PerturbationKind::Insertion => {
            let f0 = f(&vec![0.0; d]);
            Box::new(move |s: &[bool]| (f(&only(x, s)) - f0 - sets.inserted_mass(s)).abs())
        }
    };
    Ok(PowersetSummary {
        total: sum_powerset(d, &term),
        max: max_powerset(d, &term),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn monomial(x: &[f64]) -> f64 {
        x.iter().product()
    }

    #[test]
    fn del_err_examples() {
        let theta = [2.0, -1.0, 0.5];
        let x = [1.0, 3.0, -2.0];
        let linear = |v: &[f64]| v.iter().zip(&theta).map(|(a, b)| a * b).sum::<f64>();
        let alpha: Vec<f64> = theta.iter().zip(&x).map(|(t, v)| t * v).collect();
        assert_eq!(del_err(linear, &x, &alpha, &[0, 2]).unwrap(), 0.0);
        assert_eq!(del_err(monomial, &x, &[5.0, 1.0, 2.0], &[]).unwrap(), 0.0);
        assert_eq!(
            del_err(monomial, &[1.0, 1.0], &[1.0, 1.0], &[0, 1]).unwrap(),
            1.0
        );
        assert!(matches!(
            del_err(monomial, &[1.0, 1.0], &[1.0, 1.0], &[2]),
            Err(SopError::Domain(_))
        ));
    }

    #[test]
    fn ins_err_examples() {
        let ones = [1.0; 3];
        let zero = [0.0; 3];
        assert_eq!(ins_err(monomial, &ones, &zero, &[]).unwrap(), 0.0);
        assert_eq!(ins_err(monomial, &ones, &zero, &[0, 2]).unwrap(), 0.0);
        assert_eq!(ins_err(monomial, &ones, &zero, &[0, 1, 2]).unwrap(), 1.0);
    }

    #[test]
    fn totals() {
        // best alpha for the d=2 monomial is (1/2, 1/2) with total 1
        let t = total_powerset_error(
            monomial,
            &[1.0, 1.0],
            &[0.5, 0.5],
            PerturbationKind::Deletion,
        )
        .unwrap();
        assert!((t - 1.0).abs() < 1e-15);
        let t = total_powerset_error(monomial, &[1.0; 3], &[0.0; 3], PerturbationKind::Insertion)
            .unwrap();
        assert_eq!(t, 1.0);
        let big = vec![1.0; 21];
        assert!(matches!(
            total_powerset_error(monomial, &big, &big, PerturbationKind::Insertion),
            Err(SopError::Capacity(_))
        ));
    }

    #[test]
    fn grouped_examples() {
        let x = [1.0; 4];
        let whole = ScoredGroups::from_sets(4, &[vec![0, 1, 2, 3]], vec![1.0]).unwrap();
        for s in [vec![0], vec![1, 3], vec![0, 1, 2, 3]] {
            assert_eq!(group_del_err(monomial, &x, &whole, &s).unwrap(), 0.0);
        }
        assert_eq!(group_del_err(monomial, &x, &whole, &[]).unwrap(), 0.0);

        // binomial on singletons S1={0}, S2={1}, S3={2}
        let binomial = |v: &[f64]| v[0] * v[1] + v[1] * v[2];
        let beta = ScoredGroups::from_sets(3, &[vec![0, 1], vec![1, 2]], vec![1.0, 1.0]).unwrap();
        let x = [1.0; 3];
        assert_eq!(group_del_err(binomial, &x, &beta, &[1]).unwrap(), 0.0);
        assert_eq!(group_ins_err(binomial, &x, &beta, &[0, 1, 2]).unwrap(), 0.0);
        assert_eq!(group_ins_err(binomial, &x, &beta, &[]).unwrap(), 0.0);
        assert_eq!(group_ins_err(binomial, &x, &beta, &[0, 2]).unwrap(), 0.0);
    }

    #[test]
    fn group_shape_mismatch() {
        let beta = ScoredGroups::from_sets(2, &[vec![0]], vec![1.0]).unwrap();
        assert!(group_del_err(monomial, &[1.0; 3], &beta, &[0]).is_err());
    }
}
