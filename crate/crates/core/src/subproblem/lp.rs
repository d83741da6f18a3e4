//! Dense two-phase primal simplex with Bland's rule.
//!
//! Solves `min c^T x` subject to row constraints `a_i^T x {<=, =, >=} b_i`
//! and `x >= 0`. Problems here have at most a few dozen rows, so the full
//! tableau is kept and reduced costs are recomputed on every pivot.
//! Multipliers are recovered from the final basis by solving
//! `B^T y = c_B`.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

const PIVOT_TOL: f64 = 1e-11;
const REDUCED_COST_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        Self {
            coeffs,
            relation,
            rhs,
        }
    }
}

/// `min cost^T x` over `x >= 0` and the given rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearProgram {
    pub cost: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Standard dual vector: `cost - A^T y >= 0`, `y_i <= 0` on `<=` rows,
    /// `y_i >= 0` on `>=` rows.
    pub duals: Vec<f64>,
    /// `cost - A^T y` for every structural variable.
    pub reduced_costs: Vec<f64>,
    /// `b^T y`; equals `objective` at an optimal basis.
    pub dual_objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex iteration limit {0} reached")]
    IterationLimit(usize),
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.ncols]
    }

    fn pivot(&mut self, r: usize, s: usize) {
        let p = self.rows[r][s];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let factor = row[s];
            if factor != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= factor * pv;
                }
                row[s] = 0.0;
            }
        }
        self.basis[r] = s;
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut r = cost.to_vec();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = cost[b];
            if cb != 0.0 {
                for (rj, aij) in r.iter_mut().zip(row) {
                    *rj -= cb * aij;
                }
            }
        }
        r
    }

    /// Runs Bland-rule pivots until optimal for `cost`.
    fn optimize(
        &mut self,
        cost: &[f64],
        allowed: impl Fn(usize) -> bool,
        iterations: &mut usize,
        max_iter: usize,
    ) -> Result<(), LpError> {
        loop {
            let r = self.reduced_costs(cost);
            let scale = 1.0 + cost.iter().fold(0.0f64, |m, c| m.max(c.abs()));
            let Some(s) = (0..self.ncols).find(|&j| allowed(j) && r[j] < -REDUCED_COST_TOL * scale)
            else {
                return Ok(());
            };

            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][s];
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(i).max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        let tie = (ratio - lr).abs() <= 1e-12 * (1.0 + lr.abs());
                        if (!tie && ratio < lr) || (tie && self.basis[i] < self.basis[li]) {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
            let Some((r_idx, _)) = leave else {
                return Err(LpError::Unbounded);
            };
            if *iterations >= max_iter {
                return Err(LpError::IterationLimit(max_iter));
            }
            self.pivot(r_idx, s);
            *iterations += 1;
        }
    }
}

impl LinearProgram {
    pub fn new(cost: Vec<f64>) -> Self {
        Self {
            cost,
            constraints: Vec::new(),
        }
    }

    pub fn push(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        debug_assert_eq!(coeffs.len(), self.cost.len());
        self.constraints.push(Constraint::new(coeffs, relation, rhs));
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    /// Solves the program with at most `max_iter` pivots over both phases.
    pub fn solve(&self, max_iter: usize) -> Result<LpSolution, LpError> {
        let nv = self.cost.len();
        let m = self.constraints.len();
        if m == 0 {
            if self.cost.iter().any(|&c| c < 0.0) {
                return Err(LpError::Unbounded);
            }
            return Ok(LpSolution {
                x: vec![0.0; nv],
                objective: 0.0,
                duals: Vec::new(),
                reduced_costs: self.cost.clone(),
                dual_objective: 0.0,
                iterations: 0,
            });
        }

        // Normalize to b >= 0.
        let mut flipped = vec![false; m];
        let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::with_capacity(m);
        for (i, c) in self.constraints.iter().enumerate() {
            if c.rhs < 0.0 {
                flipped[i] = true;
                let rel = match c.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                rows.push((c.coeffs.iter().map(|v| -v).collect(), rel, -c.rhs));
            } else {
                rows.push((c.coeffs.clone(), c.relation, c.rhs));
            }
        }

        let ns = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let na = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let ncols = nv + ns + na;
        let art_start = nv + ns;

        let mut std_matrix = DMatrix::<f64>::zeros(m, ncols);
        let mut basis = vec![0usize; m];
        let (mut next_slack, mut next_art) = (nv, art_start);
        for (i, (coeffs, rel, _)) in rows.iter().enumerate() {
            for (j, v) in coeffs.iter().enumerate() {
                std_matrix[(i, j)] = *v;
            }
            match rel {
                Relation::Le => {
                    std_matrix[(i, next_slack)] = 1.0;
                    basis[i] = next_slack;
                    next_slack += 1;
                }
                Relation::Ge => {
                    std_matrix[(i, next_slack)] = -1.0;
                    next_slack += 1;
                    std_matrix[(i, next_art)] = 1.0;
                    basis[i] = next_art;
                    next_art += 1;
                }
                Relation::Eq => {
                    std_matrix[(i, next_art)] = 1.0;
                    basis[i] = next_art;
                    next_art += 1;
                }
            }
        }
        let b: Vec<f64> = rows.iter().map(|r| r.2).collect();

        let mut tab = Tableau {
            rows: (0..m)
                .map(|i| {
                    let mut row: Vec<f64> = std_matrix.row(i).iter().copied().collect();
                    row.push(b[i]);
                    row
                })
                .collect(),
            basis,
            ncols,
        };

        let mut iterations = 0;
        if na > 0 {
            let mut phase1 = vec![0.0; ncols];
            for c in phase1.iter_mut().skip(art_start) {
                *c = 1.0;
            }
            tab.optimize(&phase1, |_| true, &mut iterations, max_iter)?;
            let infeas: f64 = (0..m)
                .filter(|&i| tab.basis[i] >= art_start)
                .map(|i| tab.rhs(i))
                .sum();
            let bscale = 1.0 + b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            if infeas > 1e-9 * bscale {
                return Err(LpError::Infeasible);
            }
            // Pivot zero-level artificials out where possible; rows where
            // that fails are redundant.
            for i in 0..m {
                if tab.basis[i] < art_start {
                    continue;
                }
                if let Some(j) = (0..art_start).find(|&j| tab.rows[i][j].abs() > 1e-9) {
                    tab.pivot(i, j);
                }
            }
        }

        let mut cost2 = vec![0.0; ncols];
        cost2[..nv].copy_from_slice(&self.cost);
        tab.optimize(&cost2, |j| j < art_start, &mut iterations, max_iter)?;

        // Refine primal and dual values from the final basis.
        let basis_matrix = DMatrix::from_fn(m, m, |i, k| std_matrix[(i, tab.basis[k])]);
        let cb = DVector::from_fn(m, |k, _| cost2[tab.basis[k]]);
        let lu = basis_matrix.clone().lu();
        let xb = lu
            .solve(&DVector::from_column_slice(&b))
            .unwrap_or_else(|| DVector::from_fn(m, |i, _| tab.rhs(i)));
        let y_std = basis_matrix
            .transpose()
            .lu()
            .solve(&cb)
            .unwrap_or_else(|| {
                let r = tab.reduced_costs(&cost2);
                // identity columns: slack (+e_i) for <= rows, artificial otherwise
                let mut y = DVector::zeros(m);
                let (mut s, mut a) = (nv, art_start);
                for (i, row) in rows.iter().enumerate() {
                    let col = match row.1 {
                        Relation::Le => {
                            s += 1;
                            s - 1
                        }
                        Relation::Ge => {
                            s += 1;
                            a += 1;
                            a - 1
                        }
                        Relation::Eq => {
                            a += 1;
                            a - 1
                        }
                    };
                    y[i] = cost2[col] - r[col];
                }
                y
            });

        let mut x = vec![0.0; nv];
        for (k, &col) in tab.basis.iter().enumerate() {
            if col < nv {
                x[col] = xb[k].max(0.0);
            }
        }
        let duals: Vec<f64> = (0..m)
            .map(|i| if flipped[i] { -y_std[i] } else { y_std[i] })
            .collect();
        let reduced_costs: Vec<f64> = (0..nv)
            .map(|j| {
                self.cost[j]
                    - self
                        .constraints
                        .iter()
                        .zip(&duals)
                        .map(|(c, y)| c.coeffs[j] * y)
                        .sum::<f64>()
            })
            .collect();
        let objective = self.cost.iter().zip(&x).map(|(c, v)| c * v).sum();
        let dual_objective = self
            .constraints
            .iter()
            .zip(&duals)
            .map(|(c, y)| c.rhs * y)
            .sum();

        Ok(LpSolution {
            x,
            objective,
            duals,
            reduced_costs,
            dual_objective,
            iterations,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * (1.0 + b.abs())
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  ->  x=2, y=6, 36
        let mut lp = LinearProgram::new(vec![-3.0, -5.0]);
        lp.push(vec![1.0, 0.0], Relation::Le, 4.0);
        lp.push(vec![0.0, 2.0], Relation::Le, 12.0);
        lp.push(vec![3.0, 2.0], Relation::Le, 18.0);
        let s = lp.solve(100).unwrap();
        assert!(close(s.x[0], 2.0) && close(s.x[1], 6.0));
        assert!(close(s.objective, -36.0));
        assert!(close(s.dual_objective, -36.0));
        // known shadow prices 0, 1.5, 1 (negated for the min form)
        assert!(close(s.duals[0], 0.0));
        assert!(close(s.duals[1], -1.5));
        assert!(close(s.duals[2], -1.0));
        assert!(s.reduced_costs.iter().all(|r| *r >= -1e-12));
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + y s.t. x + y = 3, x >= 1 (as a row), y >= 0.5
        let mut lp = LinearProgram::new(vec![1.0, 2.0]);
        lp.push(vec![1.0, 1.0], Relation::Eq, 3.0);
        lp.push(vec![1.0, 0.0], Relation::Ge, 1.0);
        lp.push(vec![0.0, 1.0], Relation::Ge, 0.5);
        let s = lp.solve(100).unwrap();
        assert!(close(s.x[0], 2.5) && close(s.x[1], 0.5));
        assert!(close(s.objective, 3.5));
        assert!(close(s.dual_objective, s.objective));
    }

    #[test]
    fn negative_rhs_is_flipped() {
        // min x s.t. -x <= -2  (x >= 2)
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.push(vec![-1.0], Relation::Le, -2.0);
        let s = lp.solve(10).unwrap();
        assert!(close(s.x[0], 2.0));
        assert!(close(s.duals[0], -1.0));
        assert!(close(s.dual_objective, 2.0));
    }

    #[test]
    fn infeasible() {
        let mut lp = LinearProgram::new(vec![0.0, 0.0]);
        lp.push(vec![0.0, 0.0], Relation::Le, -1.0);
        assert_eq!(lp.solve(10).unwrap_err(), LpError::Infeasible);

        let mut lp = LinearProgram::new(vec![1.0]);
        lp.push(vec![1.0], Relation::Le, 1.0);
        lp.push(vec![1.0], Relation::Ge, 2.0);
        assert_eq!(lp.solve(10).unwrap_err(), LpError::Infeasible);
    }

    #[test]
    fn unbounded() {
        let mut lp = LinearProgram::new(vec![-1.0, 0.0]);
        lp.push(vec![0.0, 1.0], Relation::Le, 1.0);
        assert_eq!(lp.solve(10).unwrap_err(), LpError::Unbounded);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.push(vec![1.0, 1.0], Relation::Eq, 2.0);
        lp.push(vec![2.0, 2.0], Relation::Eq, 4.0);
        let s = lp.solve(20).unwrap();
        assert!(close(s.objective, 2.0));
        assert!(close(s.dual_objective, 2.0));
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's classic cycling example; Bland's rule must terminate.
        let mut lp = LinearProgram::new(vec![-0.75, 150.0, -0.02, 6.0]);
        lp.push(vec![0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0);
        lp.push(vec![0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0);
        lp.push(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0);
        let s = lp.solve(100).unwrap();
        assert!(close(s.objective, -0.05));
        assert!(close(s.dual_objective, -0.05));
    }

    #[test]
    fn iteration_limit() {
        let mut lp = LinearProgram::new(vec![-3.0, -5.0]);
        lp.push(vec![1.0, 0.0], Relation::Le, 4.0);
        lp.push(vec![0.0, 2.0], Relation::Le, 12.0);
        lp.push(vec![3.0, 2.0], Relation::Le, 18.0);
        assert_eq!(lp.solve(1).unwrap_err(), LpError::IterationLimit(1));
    }

    #[test]
    fn no_rows() {
        let s = LinearProgram::new(vec![1.0, 0.0]).solve(5).unwrap();
        assert_eq!(s.x, vec![0.0, 0.0]);
        assert_eq!(s.objective, 0.0);
    }
}
