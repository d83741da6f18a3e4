use nalgebra::{DMatrix, DVector};

use super::{ModelKind, ScalarModel, SurrogateSet};
use crate::error::Result;
use crate::problem::{evaluate, EvalDatabase, EvalRecord, Problem};

fn stacked(rec: &EvalRecord) -> DVector<f64> {
    DVector::from_iterator(
        rec.f.len() + rec.h.len() + rec.g.len(),
        rec.f.iter().chain(rec.h.iter()).chain(rec.g.iter()).copied(),
    )
}

fn eval_stacked(problem: &Problem, db: &mut EvalDatabase, x: &DVector<f64>) -> Result<DVector<f64>> {
    Ok(stacked(&evaluate(problem, db, x.as_slice())?))
}

/// Finite-difference Taylor models of degree 1 or 2 at `x`.
///
/// Gradients use central differences with step `min(delta, 1e-6 max(1, |x_i|))`.
/// The second-order terms use a fixed step `1e-3 max(1, |x_i|)`: at the
/// gradient step the second difference would be dominated by roundoff.
pub fn build_taylor(
    problem: &Problem,
    db: &mut EvalDatabase,
    x: &DVector<f64>,
    delta: f64,
    degree: u8,
) -> Result<SurrogateSet> {
    assert!(degree == 1 || degree == 2, "Taylor degree must be 1 or 2");
    let n = x.len();
    let center = stacked(&evaluate(problem, db, x.as_slice())?);
    let q = center.len();

    let mut grads = DMatrix::zeros(q, n);
    for i in 0..n {
        let h = delta.min(1e-6 * x[i].abs().max(1.0));
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += h;
        xm[i] -= h;
        let width = xp[i] - xm[i];
        if width == 0.0 {
            continue;
        }
        let vp = eval_stacked(problem, db, &xp)?;
        let vm = eval_stacked(problem, db, &xm)?;
        grads.column_mut(i).copy_from(&((vp - vm) / width));
    }

    let mut hessians = vec![DMatrix::zeros(n, n); q];
    if degree == 2 {
        let steps: Vec<f64> = x.iter().map(|v| 1e-3 * v.abs().max(1.0)).collect();
        let shifted = |signs: &[(usize, f64)]| {
            let mut y = x.clone();
            for &(i, s) in signs {
                y[i] += s * steps[i];
            }
            y
        };
        for i in 0..n {
            let vp = eval_stacked(problem, db, &shifted(&[(i, 1.0)]))?;
            let vm = eval_stacked(problem, db, &shifted(&[(i, -1.0)]))?;
            let k2 = steps[i] * steps[i];
            for (o, hess) in hessians.iter_mut().enumerate() {
                hess[(i, i)] = (vp[o] - 2.0 * center[o] + vm[o]) / k2;
            }
            for j in 0..i {
                let vpp = eval_stacked(problem, db, &shifted(&[(i, 1.0), (j, 1.0)]))?;
                let vpm = eval_stacked(problem, db, &shifted(&[(i, 1.0), (j, -1.0)]))?;
                let vmp = eval_stacked(problem, db, &shifted(&[(i, -1.0), (j, 1.0)]))?;
                let vmm = eval_stacked(problem, db, &shifted(&[(i, -1.0), (j, -1.0)]))?;
                let denom = 4.0 * steps[i] * steps[j];
                for (o, hess) in hessians.iter_mut().enumerate() {
                    let v = (vpp[o] - vpm[o] - vmp[o] + vmm[o]) / denom;
                    hess[(i, j)] = v;
                    hess[(j, i)] = v;
                }
            }
        }
    }

    let kind = if degree == 1 {
        ModelKind::Taylor1
    } else {
        ModelKind::Taylor2
    };
    let mut models: Vec<ScalarModel> = hessians
        .into_iter()
        .enumerate()
        .map(|(o, hess)| {
            ScalarModel::taylor(
                kind,
                x.clone(),
                delta,
                center[o],
                grads.row(o).transpose(),
                hess,
            )
        })
        .collect();
    let inequalities = models.split_off(problem.num_obj() + problem.num_eq());
    let equalities = models.split_off(problem.num_obj());
    Ok(SurrogateSet {
        kind,
        center: x.clone(),
        radius: delta,
        fully_linear: true,
        objectives: models,
        equalities,
        inequalities,
    })
}
