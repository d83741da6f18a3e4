//! Step subproblems of the composite-step method.
//!
//! * [`normal_step`]: least-norm point of the linearized feasible set,
//! * [`lp_tangential`]: multi-objective descent LP and its duals,
//! * [`initial_steplength`]: largest step along `d` that stays in the
//!   trust region and the linearized set,
//! * [`kkt_residual`]: KKT residuals built from the tangential duals.

pub mod lp;
pub mod qp;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use lp::{LinearProgram, LpError, Relation};

/// Linearized constraints around a point, in step coordinates:
/// `{ s : h0 + H s = 0, g0 + G s <= 0 }`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedSet {
    pub eq_jacobian: DMatrix<f64>,
    pub eq_values: DVector<f64>,
    pub ineq_jacobian: DMatrix<f64>,
    pub ineq_values: DVector<f64>,
}

impl LinearizedSet {
    pub fn new(
        eq_jacobian: DMatrix<f64>,
        eq_values: DVector<f64>,
        ineq_jacobian: DMatrix<f64>,
        ineq_values: DVector<f64>,
    ) -> Self {
        assert_eq!(eq_jacobian.nrows(), eq_values.len());
        assert_eq!(ineq_jacobian.nrows(), ineq_values.len());
        Self {
            eq_jacobian,
            eq_values,
            ineq_jacobian,
            ineq_values,
        }
    }

    /// No constraints in `R^n`.
    pub fn unconstrained(n: usize) -> Self {
        Self::new(
            DMatrix::zeros(0, n),
            DVector::zeros(0),
            DMatrix::zeros(0, n),
            DVector::zeros(0),
        )
    }

    /// Only inequalities `g0 + G s <= 0`.
    pub fn inequalities(ineq_jacobian: DMatrix<f64>, ineq_values: DVector<f64>) -> Self {
        let n = ineq_jacobian.ncols();
        Self::new(DMatrix::zeros(0, n), DVector::zeros(0), ineq_jacobian, ineq_values)
    }

    pub fn dim(&self) -> usize {
        self.eq_jacobian.ncols().max(self.ineq_jacobian.ncols())
    }

    /// Largest violation of the linearized constraints at step `s`.
    pub fn violation(&self, s: &DVector<f64>) -> f64 {
        let h = &self.eq_values + &self.eq_jacobian * s;
        let g = &self.ineq_values + &self.ineq_jacobian * s;
        h.iter()
            .map(|v| v.abs())
            .chain(g.iter().copied())
            .fold(0.0, f64::max)
    }

    /// The same set re-centered at `x + n_step`.
    ///
    /// Residuals at the level of roundoff are cleaned so that `s = 0` is
    /// exactly feasible after shifting by a computed normal step.
    pub fn shifted(&self, n_step: &DVector<f64>) -> Self {
        let tol = |row: nalgebra::RowDVector<f64>, v0: f64| {
            1e-9 * (1.0 + v0.abs() + row.norm() * n_step.norm())
        };
        let mut eq_values = &self.eq_values + &self.eq_jacobian * n_step;
        for i in 0..eq_values.len() {
            if eq_values[i].abs() <= tol(self.eq_jacobian.row(i).into_owned(), self.eq_values[i]) {
                eq_values[i] = 0.0;
            }
        }
        let mut ineq_values = &self.ineq_values + &self.ineq_jacobian * n_step;
        for i in 0..ineq_values.len() {
            let t = tol(self.ineq_jacobian.row(i).into_owned(), self.ineq_values[i]);
            if ineq_values[i] > 0.0 && ineq_values[i] <= t {
                ineq_values[i] = 0.0;
            }
        }
        Self {
            eq_jacobian: self.eq_jacobian.clone(),
            eq_values,
            ineq_jacobian: self.ineq_jacobian.clone(),
            ineq_values,
        }
    }
}

/// Least-norm step into the linearized feasible set.
pub fn normal_step(lin: &LinearizedSet) -> Result<DVector<f64>> {
    let n = lin.dim();
    qp::least_norm_point(
        &lin.eq_jacobian,
        &(-&lin.eq_values),
        &lin.ineq_jacobian,
        &(-&lin.ineq_values),
        n,
    )
    .map(|s| s.z)
    .map_err(|e| match e {
        qp::QpError::Infeasible => Error::Infeasible,
        qp::QpError::IterationLimit => {
            Error::NumericalFailure("normal step QP iteration limit".into())
        }
    })
}

/// Compatibility bound `c_delta * delta_bar * min{1, c_mu * delta_bar^mu}`.
pub fn compatibility_bound(delta_bar: f64, c_delta: f64, c_mu: f64, mu: f64) -> f64 {
    c_delta * delta_bar * (c_mu * delta_bar.powf(mu)).min(1.0)
}

pub fn compatible(n_step: &DVector<f64>, delta_bar: f64, c_delta: f64, c_mu: f64, mu: f64) -> bool {
    n_step.norm() <= compatibility_bound(delta_bar, c_delta, c_mu, mu)
}

/// Multipliers of the tangential LP, all in the sign convention of the
/// Lagrangian `beta + y3^T (F d - beta) + y4^T (h0 + H d) + y5^T (g0 + G d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Duals {
    /// Objective rows, nonnegative, summing to one.
    pub y3: DVector<f64>,
    pub y4: DVector<f64>,
    /// Inequality rows, nonnegative.
    pub y5: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TangentialSolution {
    pub d: DVector<f64>,
    /// Optimal `beta`, i.e. `-omega`.
    pub beta: f64,
    pub omega: f64,
    pub chi: f64,
    /// Dual objective value; equals `beta` up to roundoff.
    pub dual_value: f64,
    pub duals: Option<Duals>,
}

impl TangentialSolution {
    pub fn duality_gap(&self) -> f64 {
        (self.beta - self.dual_value).abs()
    }
}

/// `min beta` s.t. `F d <= beta 1`, `d` in the linearized set, `||d||_inf <= radius`.
///
/// Solved with `d = u - radius 1`, `u >= 0`, and `beta = t1 - t2`.
pub fn lp_tangential_box(
    f_jac: &DMatrix<f64>,
    lin: &LinearizedSet,
    radius: f64,
) -> Result<TangentialSolution> {
    let n = f_jac.ncols();
    let k = f_jac.nrows();
    let m = lin.eq_values.len();
    let p = lin.ineq_values.len();
    let nv = n + 2;

    let mut cost = vec![0.0; nv];
    cost[n] = 1.0;
    cost[n + 1] = -1.0;
    let mut prog = LinearProgram::new(cost);

    let row_with = |a: nalgebra::RowDVector<f64>, t: f64| -> (Vec<f64>, f64) {
        let mut c: Vec<f64> = a.iter().copied().collect();
        c.push(-t);
        c.push(t);
        let shift = radius * a.sum();
        (c, shift)
    };
    for i in 0..k {
        let (c, shift) = row_with(f_jac.row(i).into_owned(), 1.0);
        prog.push(c, Relation::Le, shift);
    }
    for i in 0..m {
        let (c, shift) = row_with(lin.eq_jacobian.row(i).into_owned(), 0.0);
        prog.push(c, Relation::Eq, -lin.eq_values[i] + shift);
    }
    for i in 0..p {
        let (c, shift) = row_with(lin.ineq_jacobian.row(i).into_owned(), 0.0);
        prog.push(c, Relation::Le, -lin.ineq_values[i] + shift);
    }
    for j in 0..n {
        let mut c = vec![0.0; nv];
        c[j] = 1.0;
        prog.push(c, Relation::Le, 2.0 * radius);
    }

    let cap = 50 * (n + k + m + p);
    let sol = prog.solve(cap).map_err(|e| match e {
        LpError::Infeasible => Error::Infeasible,
        LpError::Unbounded => Error::NumericalFailure("tangential LP unbounded".into()),
        LpError::IterationLimit(it) => {
            Error::NumericalFailure(format!("tangential LP exceeded {it} simplex iterations"))
        }
    })?;

    let d = DVector::from_fn(n, |j, _| sol.x[j] - radius);
    let beta = sol.x[n] - sol.x[n + 1];
    let omega = (-beta).max(0.0);
    let y = &sol.duals;
    let duals = Duals {
        y3: DVector::from_fn(k, |i, _| (-y[i]).max(0.0)),
        y4: DVector::from_fn(m, |i, _| -y[k + i]),
        y5: DVector::from_fn(p, |i, _| (-y[k + m + i]).max(0.0)),
    };
    Ok(TangentialSolution {
        d,
        beta,
        omega,
        chi: omega.min(1.0),
        dual_value: sol.dual_objective,
        duals: Some(duals),
    })
}

/// Tangential step on the unit infinity-norm ball; `lin` must already be
/// centered at the point after the normal step.
pub fn lp_tangential(f_jac: &DMatrix<f64>, lin_shifted: &LinearizedSet) -> Result<TangentialSolution> {
    lp_tangential_box(f_jac, lin_shifted, 1.0)
}

/// KKT residuals from tangential duals: returns `(stationarity, complementarity)`.
pub fn kkt_residual(
    f_jac: &DMatrix<f64>,
    eq_jac: &DMatrix<f64>,
    ineq_jac: &DMatrix<f64>,
    g_values: &DVector<f64>,
    sol: &TangentialSolution,
) -> (f64, f64) {
    let duals = sol
        .duals
        .as_ref()
        .expect("KKT residual requires tangential duals");
    let total = duals.y3.sum();
    assert!(total > 0.0, "objective multipliers must not vanish");
    let w = &duals.y3 / total;
    let y4 = &duals.y4 / total;
    let y5 = &duals.y5 / total;
    let mut grad = f_jac.transpose() * w;
    if eq_jac.nrows() > 0 {
        grad += eq_jac.transpose() * y4;
    }
    if ineq_jac.nrows() > 0 {
        grad += ineq_jac.transpose() * &y5;
    }
    (grad.norm(), g_values.dot(&y5).abs())
}

/// Largest `sigma` with `n + sigma d/||d||` in the 2-norm ball of radius
/// `delta` and `sigma d/||d||` in the (shifted) linearized set.
pub fn initial_steplength(
    n_step: &DVector<f64>,
    d: &DVector<f64>,
    delta: f64,
    lin_shifted: &LinearizedSet,
) -> Result<f64> {
    let dn = d.norm();
    if dn == 0.0 {
        return Err(Error::ZeroDirection);
    }
    let u = d / dn;
    let nu = n_step.dot(&u);
    let disc = nu * nu - n_step.norm_squared() + delta * delta;
    let mut sigma = if disc < 0.0 { 0.0 } else { (-nu + disc.sqrt()).max(0.0) };

    let gu = &lin_shifted.ineq_jacobian * &u;
    for i in 0..gu.len() {
        if gu[i] > 0.0 {
            sigma = sigma.min((-lin_shifted.ineq_values[i] / gu[i]).max(0.0));
        }
    }
    Ok(sigma)
}

/// Ratio of a certified lower bound on the 2-norm-ball criticality value
/// to the infinity-norm value. Lies in `[1/sqrt(n), 1]`; `1` when both
/// vanish.
pub fn omega_norm_ratio_probe(f_jac: &DMatrix<f64>, lin_shifted: &LinearizedSet) -> Result<f64> {
    let n = f_jac.ncols();
    let outer = lp_tangential_box(f_jac, lin_shifted, 1.0)?;
    if outer.omega <= 1e-14 {
        return Ok(1.0);
    }
    let inner = lp_tangential_box(f_jac, lin_shifted, 1.0 / (n as f64).sqrt())?;
    let scaled = outer.omega / outer.d.norm().max(1.0);
    let lower = inner.omega.max(scaled).min(outer.omega);
    Ok(lower / outer.omega)
}
