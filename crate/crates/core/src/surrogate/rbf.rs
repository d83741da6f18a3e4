//! Cubic RBF interpolation with a linear tail.
//!
//! Points are selected as in ORBIT: database points within
//! `search_factor * delta` of the center are scanned newest first and kept
//! when they add a new direction (projection onto the orthogonal complement
//! of the directions so far of at least `pivot_threshold`, in coordinates
//! scaled by the search radius). Missing directions are filled with fresh
//! samples `x + delta e_i`. Remaining nearby points are added while the
//! interpolation system stays well conditioned, up to `max_points`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{ModelKind, RbfNodes, ScalarModel, SurrogateSet};
use crate::error::{Error, Result};
use crate::problem::{evaluate, EvalDatabase, EvalRecord, Problem};

#[derive(Debug, Clone, PartialEq)]
pub struct RbfParams {
    pub search_factor: f64,
    pub pivot_threshold: f64,
    /// Total interpolation points including the center; `None` means
    /// `(n+1)(n+2)/2`.
    pub max_points: Option<usize>,
    /// Smallest admissible reciprocal condition number when adding extra
    /// points.
    pub min_rcond: f64,
}

impl Default for RbfParams {
    fn default() -> Self {
        Self {
            search_factor: 2.0,
            pivot_threshold: 1e-3,
            max_points: None,
            min_rcond: 1e-10,
        }
    }
}

const SINGULAR_RCOND: f64 = 1e-14;

fn stacked(rec: &EvalRecord) -> Vec<f64> {
    rec.f.iter().chain(rec.h.iter()).chain(rec.g.iter()).copied().collect()
}

fn system_matrix(nodes: &[DVector<f64>]) -> DMatrix<f64> {
    let p = nodes.len();
    let n = nodes[0].len();
    let mut a = DMatrix::zeros(p + n + 1, p + n + 1);
    for i in 0..p {
        for j in 0..i {
            let v = (&nodes[i] - &nodes[j]).norm().powi(3);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
        a[(i, p)] = 1.0;
        a[(p, i)] = 1.0;
        for k in 0..n {
            a[(i, p + 1 + k)] = nodes[i][k];
            a[(p + 1 + k, i)] = nodes[i][k];
        }
    }
    a
}

fn rcond(a: &DMatrix<f64>) -> f64 {
    let sv = a.singular_values();
    let max = sv.max();
    if max == 0.0 {
        0.0
    } else {
        sv.min() / max
    }
}

fn residual_from(basis: &[DVector<f64>], v: &DVector<f64>) -> DVector<f64> {
    let mut r = v.clone();
    for q in basis {
        let c = q.dot(&r);
        r -= c * q;
    }
    r
}

fn assemble(
    problem: &Problem,
    x: &DVector<f64>,
    delta: f64,
    scale: f64,
    nodes: Vec<DVector<f64>>,
    values: Vec<Vec<f64>>,
) -> Result<SurrogateSet> {
    let n = x.len();
    let p = nodes.len();
    let a = system_matrix(&nodes);
    if rcond(&a) < SINGULAR_RCOND {
        return Err(Error::SingularInterpolation { points: p });
    }
    let q = values[0].len();
    let mut rhs = DMatrix::zeros(p + n + 1, q);
    for (i, v) in values.iter().enumerate() {
        for (o, val) in v.iter().enumerate() {
            rhs[(i, o)] = *val;
        }
    }
    let sol = a
        .clone()
        .lu()
        .solve(&rhs)
        .filter(|s| s.iter().all(|v| v.is_finite()))
        .ok_or(Error::SingularInterpolation { points: p })?;

    let shared = Arc::new(RbfNodes { scale, nodes });
    let mut models: Vec<ScalarModel> = (0..q)
        .map(|o| {
            let col = sol.column(o);
            ScalarModel::rbf(
                x.clone(),
                delta,
                shared.clone(),
                col.rows(0, p).into_owned(),
                col.rows(p, n + 1).into_owned(),
            )
        })
        .collect();

    // interpolation residual guard
    for (node, v) in shared.nodes.iter().zip(&values) {
        let xi = x + node * scale;
        for (m, val) in models.iter().zip(v) {
            if (m.value(&xi) - val).abs() > 1e-8 * val.abs().max(1.0) {
                return Err(Error::SingularInterpolation { points: p });
            }
        }
    }

    let inequalities = models.split_off(problem.num_obj() + problem.num_eq());
    let equalities = models.split_off(problem.num_obj());
    Ok(SurrogateSet {
        kind: ModelKind::RbfCubic,
        center: x.clone(),
        radius: delta,
        fully_linear: true,
        objectives: models,
        equalities,
        inequalities,
    })
}

/// Cubic RBF models at `x` for radius `delta`, reusing database points.
pub fn build_rbf(
    problem: &Problem,
    db: &mut EvalDatabase,
    x: &DVector<f64>,
    delta: f64,
    params: &RbfParams,
) -> Result<SurrogateSet> {
    let n = x.len();
    let center = evaluate(problem, db, x.as_slice())?;
    let scale = params.search_factor * delta;

    let candidates: Vec<(DVector<f64>, Vec<f64>)> = db
        .records()
        .iter()
        .rev()
        .filter_map(|rec| {
            let s = (&rec.x - x) / scale;
            let norm = s.norm();
            (norm > 0.0 && norm <= 1.0).then(|| (s, stacked(rec)))
        })
        .collect();

    let mut nodes = vec![DVector::zeros(n)];
    let mut values = vec![stacked(&center)];
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut used = vec![false; candidates.len()];

    for (idx, (s, v)) in candidates.iter().enumerate() {
        if basis.len() == n {
            break;
        }
        let r = residual_from(&basis, s);
        let rn = r.norm();
        if rn >= params.pivot_threshold {
            basis.push(r / rn);
            nodes.push(s.clone());
            values.push(v.clone());
            used[idx] = true;
        }
    }

    while basis.len() < n {
        let (axis, _) = (0..n)
            .map(|i| (i, residual_from(&basis, &DVector::from_fn(n, |j, _| f64::from(j == i))).norm()))
            .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
        let mut y = x.clone();
        y[axis] += delta;
        let rec = evaluate(problem, db, y.as_slice())?;
        let s = (&rec.x - x) / scale;
        let r = residual_from(&basis, &s);
        let rn = r.norm();
        if rn == 0.0 {
            return Err(Error::SingularInterpolation { points: nodes.len() });
        }
        basis.push(r / rn);
        nodes.push(s);
        values.push(stacked(&rec));
    }

    let max_points = params.max_points.unwrap_or((n + 1) * (n + 2) / 2);
    for (idx, (s, v)) in candidates.iter().enumerate() {
        if nodes.len() >= max_points {
            break;
        }
        if used[idx] {
            continue;
        }
        nodes.push(s.clone());
        if rcond(&system_matrix(&nodes)) >= params.min_rcond {
            values.push(v.clone());
        } else {
            nodes.pop();
        }
    }

    assemble(problem, x, delta, scale, nodes, values)
}

/// Linear interpolation through `x` and `x + delta e_i`; always well posed.
pub fn build_rbf_axis_only(
    problem: &Problem,
    db: &mut EvalDatabase,
    x: &DVector<f64>,
    delta: f64,
) -> Result<SurrogateSet> {
    let n = x.len();
    let center = evaluate(problem, db, x.as_slice())?;
    let mut nodes = vec![DVector::zeros(n)];
    let mut values = vec![stacked(&center)];
    for i in 0..n {
        let mut y = x.clone();
        y[i] += delta;
        let rec = evaluate(problem, db, y.as_slice())?;
        nodes.push((&rec.x - x) / delta);
        values.push(stacked(&rec));
    }
    assemble(problem, x, delta, delta, nodes, values)
}
