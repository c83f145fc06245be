//! Bounded-variable revised simplex for `min c.x  s.t.  A x = b,  l <= x <= u`.
//!
//! Dense and deliberately small: the basis inverse is kept explicitly, so the method suits
//! problems with few rows and many columns (the dual of an L1 regression). Pricing is
//! Dantzig's rule; after a run of degenerate pivots it falls back to Bland's rule, which
//! cannot cycle.

use crate::error::{Result, SopError};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 64;
const DEGENERATE_RUN_FOR_BLAND: usize = 32;

/// Linear program in bounded standard form. `columns[j]` is column `j` of `A`.
#[derive(Debug, Clone)]
pub struct BoundedLp {
    pub columns: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub cost: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    /// Simplex multipliers `y = c_B B^{-1}` of the equality rows.
    pub duals: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum State {
    Basic(usize),
    AtLower,
    AtUpper,
    /// Free variable resting at zero.
    FreeZero,
}

struct Tableau<'a> {
    lp: &'a BoundedLp,
    m: usize,
    /// Structural columns followed by one artificial column per row.
    n_total: usize,
    artificial_sign: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    state: Vec<State>,
    basis: Vec<usize>,
    /// Row-major `m x m` basis inverse.
    binv: Vec<f64>,
    iterations: usize,
    max_iterations: usize,
}

impl<'a> Tableau<'a> {
    fn column(&self, j: usize, out: &mut [f64]) {
        if j < self.lp.columns.len() {
            out.copy_from_slice(&self.lp.columns[j]);
        } else {
            out.fill(0.0);
            let r = j - self.lp.columns.len();
            out[r] = self.artificial_sign[r];
        }
    }

    fn dot_column(&self, j: usize, y: &[f64]) -> f64 {
        if j < self.lp.columns.len() {
            self.lp.columns[j].iter().zip(y).map(|(a, b)| a * b).sum()
        } else {
            let r = j - self.lp.columns.len();
            self.artificial_sign[r] * y[r]
        }
    }

    fn new(lp: &'a BoundedLp, max_iterations: usize) -> Result<Self> {
        let m = lp.rhs.len();
        let n = lp.columns.len();
        if lp.cost.len() != n || lp.lower.len() != n || lp.upper.len() != n {
            return Err(SopError::Shape(
                "LP vectors disagree on column count".into(),
            ));
        }
        if lp.columns.iter().any(|c| c.len() != m) {
            return Err(SopError::Shape("LP column has wrong height".into()));
        }
        let mut lower = lp.lower.clone();
        let mut upper = lp.upper.clone();
        let mut x = vec![0.0; n + m];
        let mut state = vec![State::AtLower; n + m];
        for j in 0..n {
            if lower[j] > upper[j] {
                return Err(SopError::Domain(format!("variable {j} has empty bounds")));
            }
            let (lo, hi) = (lower[j], upper[j]);
            // start at the bound with the better cost
            (x[j], state[j]) = match (lo.is_finite(), hi.is_finite()) {
                (true, true) if lp.cost[j] < 0.0 => (hi, State::AtUpper),
                (true, _) => (lo, State::AtLower),
                (false, true) => (hi, State::AtUpper),
                (false, false) => (0.0, State::FreeZero),
            };
        }
        let mut residual = lp.rhs.clone();
        for (j, col) in lp.columns.iter().enumerate() {
            if x[j] != 0.0 {
                for (r, a) in residual.iter_mut().zip(col) {
                    *r -= a * x[j];
                }
            }
        }
        let artificial_sign: Vec<f64> = residual
            .iter()
            .map(|&r| if r < 0.0 { -1.0 } else { 1.0 })
            .collect();
        let mut binv = vec![0.0; m * m];
        let mut basis = Vec::with_capacity(m);
        for r in 0..m {
            let j = n + r;
            lower.push(0.0);
            upper.push(f64::INFINITY);
            x[j] = residual[r].abs();
            state[j] = State::Basic(r);
            basis.push(j);
            binv[r * m + r] = artificial_sign[r];
        }
        Ok(Self {
            lp,
            m,
            n_total: n + m,
            artificial_sign,
            lower,
            upper,
            x,
            state,
            basis,
            binv,
            iterations: 0,
            max_iterations,
        })
    }

    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (r, &j) in self.basis.iter().enumerate() {
            let cb = cost[j];
            if cb != 0.0 {
                for (yi, b) in y.iter_mut().zip(&self.binv[r * m..(r + 1) * m]) {
                    *yi += cb * b;
                }
            }
        }
        y
    }

    /// Gauss-Jordan refactorization of the basis inverse and recomputation of basic values.
    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        let mut col = vec![0.0; m];
        for (c, &j) in self.basis.iter().enumerate() {
            self.column(j, &mut col);
            for r in 0..m {
                a[r * m + c] = col[r];
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let p = (c..m)
                .max_by(|&i, &k| a[i * m + c].abs().total_cmp(&a[k * m + c].abs()))
                .expect("non-empty range");
            if a[p * m + c].abs() < 1e-12 {
                return Err(SopError::Numeric(format!(
                    "singular basis during refactorization at iteration {}",
                    self.iterations
                )));
            }
            if p != c {
                for k in 0..m {
                    a.swap(p * m + k, c * m + k);
                    inv.swap(p * m + k, c * m + k);
                }
            }
            let piv = a[c * m + c];
            for k in 0..m {
                a[c * m + k] /= piv;
                inv[c * m + k] /= piv;
            }
            for r in 0..m {
                if r != c {
                    let f = a[r * m + c];
                    if f != 0.0 {
                        for k in 0..m {
                            a[r * m + k] -= f * a[c * m + k];
                            inv[r * m + k] -= f * inv[c * m + k];
                        }
                    }
                }
            }
        }
        self.binv = inv;
        // x_B = B^{-1} (b - N x_N)
        let mut residual = self.lp.rhs.clone();
        for j in 0..self.n_total {
            if !matches!(self.state[j], State::Basic(_)) && self.x[j] != 0.0 {
                self.column(j, &mut col);
                for (r, a) in residual.iter_mut().zip(&col) {
                    *r -= a * self.x[j];
                }
            }
        }
        for (r, &j) in self.basis.iter().enumerate() {
            self.x[j] = self.binv[r * m..(r + 1) * m]
                .iter()
                .zip(&residual)
                .map(|(a, b)| a * b)
                .sum();
        }
        Ok(())
    }

    /// Product-form update of the basis inverse after column with `B^{-1} a = alpha`
    /// replaces basic row `r`.
    fn update_inverse(&mut self, r: usize, alpha: &[f64]) {
        let m = self.m;
        let piv = alpha[r];
        let pivot_row: Vec<f64> = self.binv[r * m..(r + 1) * m]
            .iter()
            .map(|v| v / piv)
            .collect();
        for (i, &f) in alpha.iter().enumerate() {
            if i == r || f == 0.0 {
                continue;
            }
            for (b, p) in self.binv[i * m..(i + 1) * m].iter_mut().zip(&pivot_row) {
                *b -= f * p;
            }
        }
        self.binv[r * m..(r + 1) * m].copy_from_slice(&pivot_row);
    }

    /// Swaps zero-level artificials out of the basis wherever a structural column can
    /// take their place, so the final multipliers refer to structural columns only.
    fn drive_out_artificials(&mut self, n_structural: usize) {
        let m = self.m;
        let mut col = vec![0.0; m];
        let mut alpha = vec![0.0; m];
        for r in 0..m {
            if self.basis[r] < n_structural {
                continue;
            }
            let row = self.binv[r * m..(r + 1) * m].to_vec();
            let candidate = (0..n_structural)
                .filter(|&j| !matches!(self.state[j], State::Basic(_)))
                .map(|j| (j, self.dot_column(j, &row)))
                .filter(|(_, a)| a.abs() > 1e-7)
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()));
            let Some((q, _)) = candidate else {
                continue;
            };
            self.column(q, &mut col);
            for i in 0..m {
                alpha[i] = self.binv[i * m..(i + 1) * m]
                    .iter()
                    .zip(&col)
                    .map(|(a, b)| a * b)
                    .sum();
            }
            let out = self.basis[r];
            self.x[out] = 0.0;
            self.state[out] = State::AtLower;
            self.state[q] = State::Basic(r);
            self.basis[r] = q;
            self.update_inverse(r, &alpha);
        }
    }

    fn run(&mut self, cost: &[f64], phase: &str) -> Result<()> {
        let m = self.m;
        let mut degenerate_run = 0usize;
        let mut col = vec![0.0; m];
        let mut alpha = vec![0.0; m];
        let mut since_refactor = 0usize;
        loop {
            if self.iterations >= self.max_iterations {
                return Err(SopError::Numeric(format!(
                    "simplex did not converge in {} iterations ({phase})",
                    self.max_iterations
                )));
            }
            let y = self.duals(cost);
            let use_bland = degenerate_run >= DEGENERATE_RUN_FOR_BLAND;
            let mut entering: Option<(usize, f64, f64)> = None; // (index, direction, |d|)
            for j in 0..self.n_total {
                let st = self.state[j];
                if matches!(st, State::Basic(_)) || self.lower[j] == self.upper[j] {
                    continue;
                }
                let d = cost[j] - self.dot_column(j, &y);
                let dir = match st {
                    State::AtLower if d < -COST_TOL => 1.0,
                    State::AtUpper if d > COST_TOL => -1.0,
                    State::FreeZero if d.abs() > COST_TOL => -d.signum(),
                    _ => continue,
                };
                if use_bland {
                    entering = Some((j, dir, d.abs()));
                    break;
                }
                if entering.is_none_or(|(_, _, best)| d.abs() > best) {
                    entering = Some((j, dir, d.abs()));
                }
            }
            let Some((q, dir, _)) = entering else {
                return Ok(());
            };
            self.iterations += 1;

            self.column(q, &mut col);
            for r in 0..m {
                alpha[r] = self.binv[r * m..(r + 1) * m]
                    .iter()
                    .zip(&col)
                    .map(|(a, b)| a * b)
                    .sum();
            }
            // x_B(theta) = x_B - theta * dir * alpha
            let mut theta = self.upper[q] - self.lower[q];
            let mut leaving: Option<(usize, bool)> = None; // (row, hits upper)
            for r in 0..m {
                let rate = dir * alpha[r];
                let j = self.basis[r];
                let limit = if rate > PIVOT_TOL && self.lower[j].is_finite() {
                    Some(((self.x[j] - self.lower[j]) / rate, false))
                } else if rate < -PIVOT_TOL && self.upper[j].is_finite() {
                    Some(((self.upper[j] - self.x[j]) / -rate, true))
                } else {
                    None
                };
                let Some((t, hits_upper)) = limit else {
                    continue;
                };
                let t = t.max(0.0);
                let take = if t < theta - 1e-12 {
                    true
                } else if t <= theta + 1e-12 {
                    match leaving {
                        None => false,
                        Some((lr, _)) if use_bland => j < self.basis[lr],
                        Some((lr, _)) => alpha[r].abs() > alpha[lr].abs(),
                    }
                } else {
                    false
                };
                if take {
                    theta = t;
                    leaving = Some((r, hits_upper));
                }
            }
            if !theta.is_finite() {
                return Err(SopError::Numeric(format!(
                    "LP unbounded along column {q} ({phase})"
                )));
            }
            if theta <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            for r in 0..m {
                let j = self.basis[r];
                self.x[j] -= theta * dir * alpha[r];
            }
            match leaving {
                None => {
                    // bound flip of the entering variable
                    let (value, st) = if dir > 0.0 {
                        (self.upper[q], State::AtUpper)
                    } else {
                        (self.lower[q], State::AtLower)
                    };
                    self.x[q] = value;
                    self.state[q] = st;
                }
                Some((r, hits_upper)) => {
                    let out = self.basis[r];
                    if hits_upper {
                        self.x[out] = self.upper[out];
                        self.state[out] = State::AtUpper;
                    } else {
                        self.x[out] = self.lower[out];
                        self.state[out] = State::AtLower;
                    }
                    self.x[q] += dir * theta;
                    self.state[q] = State::Basic(r);
                    self.basis[r] = q;
                    self.update_inverse(r, &alpha);
                    since_refactor += 1;
                    if since_refactor >= REFACTOR_EVERY {
                        self.refactor()?;
                        since_refactor = 0;
                    }
                }
            }
        }
    }
}

/// Two-phase bounded simplex. Errors on infeasibility, unboundedness or iteration limit.
pub fn solve_bounded(lp: &BoundedLp, max_iterations: usize) -> Result<LpSolution> {
    let mut t = Tableau::new(lp, max_iterations)?;
    let n = lp.columns.len();
    let m = t.m;

    let phase1: Vec<f64> = (0..n + m).map(|j| if j < n { 0.0 } else { 1.0 }).collect();
    t.run(&phase1, "phase 1")?;
    t.refactor()?;
    let infeasibility: f64 = t.x[n..].iter().sum();
    let scale = 1.0 + lp.rhs.iter().map(|v| v.abs()).sum::<f64>();
    if infeasibility > 1e-7 * scale {
        return Err(SopError::Numeric(format!(
            "LP infeasible: phase 1 ended with residual {infeasibility}"
        )));
    }
    t.drive_out_artificials(n);
    for j in n..n + m {
        t.upper[j] = 0.0;
        if !matches!(t.state[j], State::Basic(_)) {
            t.x[j] = 0.0;
            t.state[j] = State::AtLower;
        }
    }

    let phase2: Vec<f64> = (0..n + m)
        .map(|j| if j < n { lp.cost[j] } else { 0.0 })
        .collect();
    t.run(&phase2, "phase 2")?;
    t.refactor()?;
    let duals = t.duals(&phase2);
    let x = t.x[..n].to_vec();
    let objective = x.iter().zip(&lp.cost).map(|(a, b)| a * b).sum();
    Ok(LpSolution {
        x,
        duals,
        objective,
        iterations: t.iterations,
    })
}
