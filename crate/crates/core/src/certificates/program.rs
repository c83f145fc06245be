use serde::{Deserialize, Serialize};

use crate::certificates::polynomial::PolynomialSpec;
use crate::error::{Result, SopError};
use crate::faithfulness::PerturbationKind;

/// Largest dimension for which a full powerset program is built.
pub const MAX_PROGRAM_DIM: usize = 15;

/// `min_alpha sum_S |c_S - M_S . alpha|` with one 0/1 row per subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L1Program {
    /// Row `S` holds the indicator of `S`.
    pub rows: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
}

impl L1Program {
    pub fn new(rows: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self> {
        if rows.len() != targets.len() {
            return Err(SopError::Shape(format!(
                "{} rows but {} targets",
                rows.len(),
                targets.len()
            )));
        }
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(SopError::Shape("program rows have unequal lengths".into()));
        }
        if rows
            .iter()
            .flatten()
            .chain(&targets)
            .any(|v| !v.is_finite())
        {
            return Err(SopError::Domain("program has non-finite entries".into()));
        }
        Ok(Self { rows, targets })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_vars(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// `sum_S |c_S - M_S . alpha|`.
    pub fn objective(&self, alpha: &[f64]) -> f64 {
        self.rows
            .iter()
            .zip(&self.targets)
            .map(|(r, c)| (c - r.iter().zip(alpha).map(|(m, a)| m * a).sum::<f64>()).abs())
            .sum()
    }

    /// Same program with rows reordered; `order[k]` is the old index of new row `k`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.n_rows()];
        for &i in order {
            if i >= seen.len() || std::mem::replace(&mut seen[i], true) {
                return Err(SopError::Domain("row order is not a permutation".into()));
            }
        }
        if order.len() != seen.len() {
            return Err(SopError::Domain("row order is not a permutation".into()));
        }
        Ok(Self {
            rows: order.iter().map(|&i| self.rows[i].clone()).collect(),
            targets: order.iter().map(|&i| self.targets[i]).collect(),
        })
    }
}

/// Powerset program for attributing `spec` at `x = 1_d`.
///
/// Rows follow binary counting (bit `i` of the row index is feature `i`). Deletion targets
/// are `p(1) - p(1 without S)`, insertion targets are `p(1_S) - p(0)`.
pub fn build_program(spec: &PolynomialSpec, kind: PerturbationKind) -> Result<L1Program> {
    spec.validate()?;
    let d = spec.d();
    if d > MAX_PROGRAM_DIM {
        return Err(SopError::Capacity(format!(
            "program over d = {d} exceeds the limit of {MAX_PROGRAM_DIM}"
        )));
    }
    let full = spec.evaluate_subset(&vec![true; d]);
    let empty = spec.evaluate_subset(&vec![false; d]);
    let n = 1usize << d;
    let mut rows = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    for code in 0..n {
        let in_s: Vec<bool> = (0..d).map(|i| code >> i & 1 == 1).collect();
        let target = match kind {
            PerturbationKind::Deletion => {
                let kept: Vec<bool> = in_s.iter().map(|b| !b).collect();
                full - spec.evaluate_subset(&kept)
            }
            PerturbationKind::Insertion => spec.evaluate_subset(&in_s) - empty,
        };
        rows.push(in_s.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect());
        targets.push(target);
    }
    L1Program::new(rows, targets)
}
