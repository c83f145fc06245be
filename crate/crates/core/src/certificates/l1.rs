use serde::{Deserialize, Serialize};

use crate::certificates::program::L1Program;
use crate::certificates::simplex::{solve_bounded, BoundedLp};
use crate::error::{Result, SopError};

/// Largest row count accepted by [`L1Route::PrimalLift`], whose basis is one row per subset.
pub const MAX_LIFT_ROWS: usize = 512;

/// How the L1 program is handed to the simplex solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum L1Route {
    /// `max c.w  s.t.  M^T w = 0, |w| <= 1`; the basis has one row per variable, and
    /// alpha is read off the multipliers.
    #[default]
    Dual,
    /// Slack lift `c - M alpha = p - q`, `min sum(p + q)`. Only for small programs.
    PrimalLift,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L1Solution {
    pub alpha: Vec<f64>,
    /// `sum |c - M alpha|` at the returned alpha.
    pub value: f64,
    /// Objective of a feasible dual point; every alpha costs at least this much.
    pub lower_bound: f64,
    pub iterations: usize,
}

const MAX_ITERATIONS: usize = 200_000;

pub fn solve_l1(program: &L1Program, route: L1Route) -> Result<L1Solution> {
    if program.n_rows() == 0 {
        return Ok(L1Solution {
            alpha: vec![],
            value: 0.0,
            lower_bound: 0.0,
            iterations: 0,
        });
    }
    let solution = match route {
        L1Route::Dual => solve_dual(program)?,
        L1Route::PrimalLift => solve_lift(program)?,
    };
    let scale = 1.0 + solution.value.abs();
    if solution.value - solution.lower_bound > 1e-6 * scale {
        return Err(SopError::Numeric(format!(
            "duality gap {} after {} iterations (value {}, bound {})",
            solution.value - solution.lower_bound,
            solution.iterations,
            solution.value,
            solution.lower_bound
        )));
    }
    Ok(solution)
}

fn solve_dual(program: &L1Program) -> Result<L1Solution> {
    let n = program.n_rows();
    let lp = BoundedLp {
        columns: program.rows.clone(),
        rhs: vec![0.0; program.n_vars()],
        cost: program.targets.iter().map(|c| -c).collect(),
        lower: vec![-1.0; n],
        upper: vec![1.0; n],
    };
    let sol = solve_bounded(&lp, MAX_ITERATIONS)?;
    let alpha: Vec<f64> = sol.duals.iter().map(|y| -y).collect();
    Ok(L1Solution {
        value: program.objective(&alpha),
        lower_bound: -sol.objective,
        alpha,
        iterations: sol.iterations,
    })
}

fn solve_lift(program: &L1Program) -> Result<L1Solution> {
    let n = program.n_rows();
    let d = program.n_vars();
    if n > MAX_LIFT_ROWS {
        return Err(SopError::Capacity(format!(
            "slack lift over {n} rows exceeds the limit of {MAX_LIFT_ROWS}"
        )));
    }
    let mut columns = Vec::with_capacity(d + 2 * n);
    for i in 0..d {
        columns.push(program.rows.iter().map(|r| r[i]).collect());
    }
    for sign in [1.0, -1.0] {
        for j in 0..n {
            let mut col = vec![0.0; n];
            col[j] = sign;
            columns.push(col);
        }
    }
    // M alpha + p - q = c
    let mut cost = vec![0.0; d];
    cost.extend(std::iter::repeat_n(1.0, 2 * n));
    let mut lower = vec![f64::NEG_INFINITY; d];
    lower.extend(std::iter::repeat_n(0.0, 2 * n));
    let lp = BoundedLp {
        columns,
        rhs: program.targets.clone(),
        cost,
        lower,
        upper: vec![f64::INFINITY; d + 2 * n],
    };
    let sol = solve_bounded(&lp, MAX_ITERATIONS)?;
    let alpha = sol.x[..d].to_vec();
    // multipliers y are a feasible point of the dual program: |y| <= 1, M^T y = 0
    let lower_bound = sol
        .duals
        .iter()
        .zip(&program.targets)
        .map(|(y, c)| y.clamp(-1.0, 1.0) * c)
        .sum();
    Ok(L1Solution {
        value: program.objective(&alpha),
        lower_bound,
        alpha,
        iterations: sol.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificates::{build_program, PolynomialSpec};
    use crate::faithfulness::PerturbationKind;

    fn identity_program() -> L1Program {
        L1Program::new(
            vec![
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
            ],
            vec![0.5, -2.0, 3.0],
        )
        .unwrap()
    }

    #[test]
    fn identity_is_exact() {
        for route in [L1Route::Dual, L1Route::PrimalLift] {
            let s = solve_l1(&identity_program(), route).unwrap();
            assert!(s.value.abs() < 1e-12, "{route:?}");
            for (a, c) in s.alpha.iter().zip([0.5, -2.0, 3.0]) {
                assert!((a - c).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn routes_agree_on_small_programs() {
        for d in 2..=6 {
            let p = build_program(
                &PolynomialSpec::monomial(d).unwrap(),
                PerturbationKind::Deletion,
            )
            .unwrap();
            let a = solve_l1(&p, L1Route::Dual).unwrap();
            let b = solve_l1(&p, L1Route::PrimalLift).unwrap();
            assert!((a.value - b.value).abs() < 1e-9, "d = {d}");
        }
    }

    #[test]
    fn lift_capacity() {
        let p = build_program(
            &PolynomialSpec::monomial(10).unwrap(),
            PerturbationKind::Deletion,
        )
        .unwrap();
        assert!(matches!(
            solve_l1(&p, L1Route::PrimalLift),
            Err(SopError::Capacity(_))
        ));
    }

    #[test]
    fn median_of_one_variable() {
        // min |1-a| + |2-a| + |10-a| at the median
        let p = L1Program::new(vec![vec![1.0]; 3], vec![1.0, 2.0, 10.0]).unwrap();
        let s = solve_l1(&p, L1Route::Dual).unwrap();
        assert!((s.value - 9.0).abs() < 1e-12);
        assert!((s.alpha[0] - 2.0).abs() < 1e-12);
    }
}
