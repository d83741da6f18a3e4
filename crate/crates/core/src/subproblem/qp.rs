//! Primal active-set method for the least-norm point of a polyhedron:
//! `min ||z||^2` subject to `A_eq z = b_eq`, `A_in z <= b_in`.
//!
//! A feasible start is obtained from the minimum 1-norm LP. The working set
//! always contains every equality row; inequality rows enter when they block
//! a step and leave when their multiplier turns negative.

use nalgebra::{DMatrix, DVector};

use super::lp::{LinearProgram, LpError, Relation};

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub z: DVector<f64>,
    /// Multipliers of the equality rows (`z + A_eq^T y + A_in^T lambda = 0`).
    pub eq_multipliers: DVector<f64>,
    /// Multipliers of the inequality rows, nonnegative, zero off the active set.
    pub ineq_multipliers: DVector<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum QpError {
    Infeasible,
    IterationLimit,
}

fn stack_rows(a_eq: &DMatrix<f64>, a_in: &DMatrix<f64>, active: &[usize]) -> DMatrix<f64> {
    let n = a_eq.ncols().max(a_in.ncols());
    let m = a_eq.nrows() + active.len();
    let mut out = DMatrix::zeros(m, n);
    for i in 0..a_eq.nrows() {
        out.row_mut(i).copy_from(&a_eq.row(i));
    }
    for (k, &i) in active.iter().enumerate() {
        out.row_mut(a_eq.nrows() + k).copy_from(&a_in.row(i));
    }
    out
}

fn pinv_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return DVector::zeros(a.ncols());
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = 1e-12 * smax.max(1e-300);
    svd.solve(b, eps).unwrap_or_else(|_| DVector::zeros(a.ncols()))
}

/// Finds a point of the polyhedron with small 1-norm, or reports emptiness.
fn feasible_start(
    a_eq: &DMatrix<f64>,
    b_eq: &DVector<f64>,
    a_in: &DMatrix<f64>,
    b_in: &DVector<f64>,
    n: usize,
) -> Result<DVector<f64>, QpError> {
    let mut lp = LinearProgram::new(vec![1.0; 2 * n]);
    let split = |row: nalgebra::RowDVector<f64>| -> Vec<f64> {
        row.iter().copied().chain(row.iter().map(|v| -v)).collect()
    };
    for i in 0..a_eq.nrows() {
        lp.push(split(a_eq.row(i).into_owned()), Relation::Eq, b_eq[i]);
    }
    for i in 0..a_in.nrows() {
        lp.push(split(a_in.row(i).into_owned()), Relation::Le, b_in[i]);
    }
    let cap = 50 * (2 * n + lp.constraints.len()) + 50;
    match lp.solve(cap) {
        Ok(sol) => Ok(DVector::from_fn(n, |j, _| sol.x[j] - sol.x[n + j])),
        Err(LpError::Infeasible) => Err(QpError::Infeasible),
        // nonnegative cost cannot be unbounded
        Err(_) => Err(QpError::IterationLimit),
    }
}

/// Least-norm point of `{z : a_eq z = b_eq, a_in z <= b_in}`.
///
/// Either block may have zero rows; `n` is the number of columns.
pub fn least_norm_point(
    a_eq: &DMatrix<f64>,
    b_eq: &DVector<f64>,
    a_in: &DMatrix<f64>,
    b_in: &DVector<f64>,
    n: usize,
) -> Result<QpSolution, QpError> {
    let m_in = a_in.nrows();
    let mut z = feasible_start(a_eq, b_eq, a_in, b_in, n)?;
    let mut active: Vec<usize> = Vec::new();
    let max_iter = 10 * (n + a_eq.nrows() + m_in) + 50;

    for iteration in 0..max_iter {
        let a_w = stack_rows(a_eq, a_in, &active);
        let b_w = DVector::from_iterator(
            a_w.nrows(),
            b_eq.iter().copied().chain(active.iter().map(|&i| b_in[i])),
        );
        let target = pinv_solve(&a_w, &b_w);
        let p = &target - &z;

        if p.norm() <= 1e-13 * (1.0 + z.norm()) {
            z = target;
            // z + A_W^T lambda = 0
            let lambda = pinv_solve(&a_w.transpose(), &(-&z));
            let ineq = lambda.rows(a_eq.nrows(), active.len()).into_owned();
            let worst = ineq
                .iter()
                .enumerate()
                .filter(|(_, v)| **v < -1e-12 * (1.0 + z.norm()))
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map(|(k, _)| k);
            match worst {
                Some(k) => {
                    active.remove(k);
                }
                None => {
                    let mut ineq_multipliers = DVector::zeros(m_in);
                    for (k, &i) in active.iter().enumerate() {
                        ineq_multipliers[i] = ineq[k].max(0.0);
                    }
                    return Ok(QpSolution {
                        z,
                        eq_multipliers: lambda.rows(0, a_eq.nrows()).into_owned(),
                        ineq_multipliers,
                        iterations: iteration,
                    });
                }
            }
            continue;
        }

        let mut alpha = 1.0;
        let mut blocking = None;
        for i in (0..m_in).filter(|i| !active.contains(i)) {
            let ap = a_in.row(i).dot(&p.transpose());
            if ap > 1e-14 * (1.0 + p.norm()) {
                let slack = (b_in[i] - a_in.row(i).dot(&z.transpose())).max(0.0);
                let ratio = slack / ap;
                if ratio < alpha {
                    alpha = ratio;
                    blocking = Some(i);
                }
            }
        }
        z += alpha * p;
        if let Some(i) = blocking {
            active.push(i);
        }
    }
    Err(QpError::IterationLimit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empty(n: usize) -> (DMatrix<f64>, DVector<f64>) {
        (DMatrix::zeros(0, n), DVector::zeros(0))
    }

    #[test]
    fn single_halfspace() {
        // 0.75 - z1 <= 0  ->  z = (0.75, 0)
        let (ae, be) = empty(2);
        let ai = DMatrix::from_row_slice(1, 2, &[-1.0, 0.0]);
        let bi = DVector::from_vec(vec![-0.75]);
        let s = least_norm_point(&ae, &be, &ai, &bi, 2).unwrap();
        assert!((s.z[0] - 0.75).abs() < 1e-12 && s.z[1].abs() < 1e-12);
        assert!((s.ineq_multipliers[0] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn origin_feasible() {
        let (ae, be) = empty(3);
        let ai = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, -1.0, 0.0, 1.0]);
        let bi = DVector::from_vec(vec![1.0, 0.5]);
        let s = least_norm_point(&ae, &be, &ai, &bi, 3).unwrap();
        assert!(s.z.norm() < 1e-14);
    }

    #[test]
    fn equality_plane_projection() {
        // x + y + z = 3  ->  (1, 1, 1)
        let ae = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
        let be = DVector::from_vec(vec![3.0]);
        let (ai, bi) = empty(3);
        let s = least_norm_point(&ae, &be, &ai, &bi, 3).unwrap();
        for v in s.z.iter() {
            assert!((v - 1.0).abs() < 1e-12);
        }
        assert!((s.eq_multipliers[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn corner_of_two_halfspaces() {
        // z1 >= 1, z2 >= 2  ->  (1, 2)
        let (ae, be) = empty(2);
        let ai = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -1.0]);
        let bi = DVector::from_vec(vec![-1.0, -2.0]);
        let s = least_norm_point(&ae, &be, &ai, &bi, 2).unwrap();
        assert!((s.z[0] - 1.0).abs() < 1e-12 && (s.z[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn inactive_constraint_drops_out() {
        // z1 + z2 >= 2 and z1 >= -5: projection (1,1); the second is inactive
        let (ae, be) = empty(2);
        let ai = DMatrix::from_row_slice(2, 2, &[-1.0, -1.0, -1.0, 0.0]);
        let bi = DVector::from_vec(vec![-2.0, 5.0]);
        let s = least_norm_point(&ae, &be, &ai, &bi, 2).unwrap();
        assert!((s.z[0] - 1.0).abs() < 1e-12 && (s.z[1] - 1.0).abs() < 1e-12);
        assert_eq!(s.ineq_multipliers[1], 0.0);
    }

    #[test]
    fn infeasible_rows() {
        let (ae, be) = empty(2);
        let ai = DMatrix::from_row_slice(1, 2, &[0.0, 0.0]);
        let bi = DVector::from_vec(vec![-1.0]);
        assert_eq!(
            least_norm_point(&ae, &be, &ai, &bi, 2).unwrap_err(),
            QpError::Infeasible
        );
    }
}
