//! Dense two-phase primal simplex for small equality-form linear programs:
//! minimize `c·z` subject to `E z = b`, `z >= 0`.
//!
//! Bland's rule picks entering and leaving variables, which rules out
//! cycling; artificial variables are driven out of the basis between the
//! phases so the phase-2 dictionary never lets one climb back above zero.
//! Instances in this crate stay below a few dozen rows and a few hundred
//! columns, well inside what a textbook tableau handles comfortably.

use crate::error::{Error, Result};

/// Reduced cost below this enters the basis; pivots smaller than this are
/// treated as zero in the ratio test.
const PIVOT_EPS: f64 = 1e-11;
const ENTER_EPS: f64 = 1e-9;
/// Phase-1 optimum above this means the equality system is infeasible.
const PHASE1_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct SimplexSolution {
    /// Optimal objective value `c·z`.
    pub objective: f64,
    /// Optimal point, one value per original variable.
    pub primal: Vec<f64>,
    /// Dual values for the equality rows as given (before any internal sign
    /// normalization).
    pub duals: Vec<f64>,
}

struct Tableau {
    m: usize,
    n_orig: usize,
    cols: usize,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let inv = 1.0 / self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            *v *= inv;
        }
        self.rhs[row] *= inv;
        self.rows[row][col] = 1.0;
        for r in 0..self.m {
            if r == row {
                continue;
            }
            let f = self.rows[r][col];
            if f == 0.0 {
                continue;
            }
            for j in 0..self.cols {
                let delta = f * self.rows[row][j];
                self.rows[r][j] -= delta;
            }
            self.rows[r][col] = 0.0;
            self.rhs[r] -= f * self.rhs[row];
            if self.rhs[r] < 0.0 && self.rhs[r] > -1e-12 {
                self.rhs[r] = 0.0;
            }
        }
        self.basis[row] = col;
    }

    fn objective(&self, cost: &[f64]) -> f64 {
        (0..self.m).map(|i| cost[self.basis[i]] * self.rhs[i]).sum()
    }

    /// Bland-rule simplex over the columns marked enterable.
    fn optimize(&mut self, cost: &[f64], enterable: &[bool]) -> Result<()> {
        let max_iters = 200 * (self.m + self.cols) + 1000;
        for _ in 0..max_iters {
            let cb: Vec<f64> = self.basis.iter().map(|&b| cost[b]).collect();
            let mut entering = None;
            for j in 0..self.cols {
                if !enterable[j] || self.basis.contains(&j) {
                    continue;
                }
                let mut rc = cost[j];
                for (c, row) in cb.iter().zip(&self.rows) {
                    rc -= c * row[j];
                }
                if rc < -ENTER_EPS {
                    entering = Some(j);
                    break;
                }
            }
            let Some(col) = entering else {
                return Ok(());
            };

            let mut leave: Option<(f64, usize)> = None;
            for i in 0..self.m {
                if self.rows[i][col] > PIVOT_EPS {
                    let ratio = self.rhs[i] / self.rows[i][col];
                    let better = match leave {
                        None => true,
                        Some((best, brow)) => {
                            ratio < best - 1e-12
                                || (ratio < best + 1e-12 && self.basis[i] < self.basis[brow])
                        }
                    };
                    if better {
                        leave = Some((ratio, i));
                    }
                }
            }
            let Some((_, row)) = leave else {
                return Err(Error::Numerical("linear program is unbounded".into()));
            };
            self.pivot(row, col);
        }
        Err(Error::Numerical("simplex iteration limit exceeded".into()))
    }
}

/// Solves `min c·z` over `E z = b`, `z >= 0`. `rows` holds `E` one row per
/// entry of `b`. Errors: infeasible system or unbounded objective.
pub fn solve_equality_lp(rows: &[Vec<f64>], b: &[f64], costs: &[f64]) -> Result<SimplexSolution> {
    let m = rows.len();
    let n_orig = costs.len();
    if b.len() != m || rows.iter().any(|r| r.len() != n_orig) {
        return Err(Error::Dimension(format!(
            "LP shape mismatch: {} rows, {} rhs entries, {} costs",
            m,
            b.len(),
            n_orig
        )));
    }
    if m == 0 {
        return Ok(SimplexSolution { objective: 0.0, primal: vec![0.0; n_orig], duals: vec![] });
    }

    let cols = n_orig + m;
    let mut flip = vec![1.0; m];
    let mut tab = Tableau {
        m,
        n_orig,
        cols,
        rows: Vec::with_capacity(m),
        rhs: vec![0.0; m],
        basis: (n_orig..cols).collect(),
    };
    for i in 0..m {
        let s = if b[i] < 0.0 { -1.0 } else { 1.0 };
        flip[i] = s;
        tab.rhs[i] = s * b[i];
        let mut row: Vec<f64> = rows[i].iter().map(|&v| s * v).collect();
        row.extend((0..m).map(|j| if j == i { 1.0 } else { 0.0 }));
        tab.rows.push(row);
    }

    let enterable: Vec<bool> = (0..cols).map(|j| j < n_orig).collect();

    // phase 1: minimize the artificial mass
    let phase1_cost: Vec<f64> = (0..cols).map(|j| if j < n_orig { 0.0 } else { 1.0 }).collect();
    tab.optimize(&phase1_cost, &enterable)?;
    let infeas = tab.objective(&phase1_cost);
    if infeas > PHASE1_TOL {
        return Err(Error::Numerical(format!(
            "equality system is infeasible: residual {infeas:.3e}"
        )));
    }

    // drive leftover artificials out of the basis; a row with no usable
    // pivot is numerically dependent and its artificial stays pinned at zero
    for i in 0..m {
        if tab.basis[i] < n_orig {
            continue;
        }
        let mut best: Option<(f64, usize)> = None;
        for j in 0..n_orig {
            let mag = tab.rows[i][j].abs();
            if mag > PIVOT_EPS && best.is_none_or(|(bm, _)| mag > bm) {
                best = Some((mag, j));
            }
        }
        if let Some((_, j)) = best {
            tab.pivot(i, j);
        }
    }

    // phase 2 over the real objective
    let mut phase2_cost = costs.to_vec();
    phase2_cost.extend(std::iter::repeat_n(0.0, m));
    tab.optimize(&phase2_cost, &enterable)?;

    let mut primal = vec![0.0; n_orig];
    for i in 0..m {
        if tab.basis[i] < n_orig {
            primal[tab.basis[i]] = tab.rhs[i];
        }
    }
    // duals read off the artificial columns, which hold the basis inverse
    let mut duals = vec![0.0; m];
    for (i, dual) in duals.iter_mut().enumerate() {
        let mut y = 0.0;
        for r in 0..tab.m {
            y += phase2_cost[tab.basis[r]] * tab.rows[r][tab.n_orig + i];
        }
        *dual = flip[i] * y;
    }

    Ok(SimplexSolution { objective: tab.objective(&phase2_cost), primal, duals })
}
