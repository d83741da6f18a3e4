//! Problem representation and evaluation bookkeeping.
//!
//! A [`Problem`] bundles three black-box vector functions: `K` objectives,
//! `M` equality constraints `h(x) = 0` and `P` inequality constraints
//! `g(x) <= 0`. All evaluations go through an [`EvalDatabase`] so that no
//! point is ever evaluated twice and previously sampled points can be reused
//! by surrogate models.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};

/// A pure vector-valued evaluator `R^n -> R^m`.
pub type VectorFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
pub struct Problem {
    name: String,
    dim: usize,
    num_obj: usize,
    num_eq: usize,
    num_ineq: usize,
    objectives: VectorFn,
    equalities: VectorFn,
    inequalities: VectorFn,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("num_obj", &self.num_obj)
            .field("num_eq", &self.num_eq)
            .field("num_ineq", &self.num_ineq)
            .finish()
    }
}

impl Problem {
    /// Creates an unconstrained problem; add constraints with
    /// [`Problem::with_equalities`] and [`Problem::with_inequalities`].
    ///
    /// Panics if `dim` or `num_obj` is zero.
    pub fn new<F>(name: impl Into<String>, dim: usize, num_obj: usize, objectives: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        assert!(dim >= 1, "problem dimension must be at least 1");
        assert!(num_obj >= 1, "at least one objective is required");
        Self {
            name: name.into(),
            dim,
            num_obj,
            num_eq: 0,
            num_ineq: 0,
            objectives: Arc::new(objectives),
            equalities: Arc::new(|_| Vec::new()),
            inequalities: Arc::new(|_| Vec::new()),
        }
    }

    pub fn with_equalities<F>(mut self, count: usize, h: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.num_eq = count;
        self.equalities = Arc::new(h);
        self
    }

    pub fn with_inequalities<F>(mut self, count: usize, g: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.num_ineq = count;
        self.inequalities = Arc::new(g);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_obj(&self) -> usize {
        self.num_obj
    }

    pub fn num_eq(&self) -> usize {
        self.num_eq
    }

    pub fn num_ineq(&self) -> usize {
        self.num_ineq
    }

    pub fn eval_objectives(&self, x: &[f64]) -> Vec<f64> {
        (self.objectives)(x)
    }

    pub fn eval_equalities(&self, x: &[f64]) -> Vec<f64> {
        (self.equalities)(x)
    }

    pub fn eval_inequalities(&self, x: &[f64]) -> Vec<f64> {
        (self.inequalities)(x)
    }

    /// Collapses the objectives into the single objective `weights . f(x)`
    /// while keeping all constraints.
    ///
    /// Panics if the weights have the wrong length, contain a negative entry
    /// or do not sum to one.
    pub fn weighted_sum(&self, weights: &[f64]) -> Problem {
        assert_eq!(weights.len(), self.num_obj, "one weight per objective");
        assert!(
            weights.iter().all(|w| *w >= 0.0 && w.is_finite()),
            "weights must be nonnegative"
        );
        let total: f64 = weights.iter().sum();
        assert!((total - 1.0).abs() <= 1e-12, "weights must sum to one");

        let inner = Arc::clone(&self.objectives);
        let w = weights.to_vec();
        Problem {
            name: format!("{}_weighted", self.name),
            num_obj: 1,
            objectives: Arc::new(move |x| {
                let f = inner(x);
                vec![f.iter().zip(&w).map(|(fi, wi)| fi * wi).sum()]
            }),
            ..self.clone()
        }
    }
}

/// One evaluated point together with its derived measures.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    pub x: DVector<f64>,
    pub f: DVector<f64>,
    pub h: DVector<f64>,
    pub g: DVector<f64>,
    /// Constraint violation, see [`infeasibility`].
    pub theta: f64,
    /// Max-scalarization of `f`.
    pub phi: f64,
}

/// Constraint violation `max{0, max |h_i|, max g_i}`.
///
/// Empty maxima contribute zero, so strictly feasible points map to `0`.
pub fn infeasibility(h: &[f64], g: &[f64]) -> f64 {
    h.iter()
        .map(|v| v.abs())
        .chain(g.iter().copied())
        .fold(0.0, f64::max)
}

/// Maximum over the objective values. Panics on an empty slice.
pub fn max_scalarization(f: &[f64]) -> f64 {
    assert!(!f.is_empty(), "max-scalarization of an empty vector");
    f.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn point_key(x: &[f64]) -> Vec<u64> {
    x.iter().map(|v| v.to_bits()).collect()
}

/// Append-only store of evaluated points with an exact-bit lookup index.
#[derive(Debug, Clone, Default)]
pub struct EvalDatabase {
    records: Vec<EvalRecord>,
    index: HashMap<Vec<u64>, usize>,
}

impl EvalDatabase {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of distinct evaluated points (equals the number of calls made
    /// to each evaluator).
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[EvalRecord] {
        &self.records
    }

    pub fn get(&self, x: &[f64]) -> Option<&EvalRecord> {
        self.index.get(&point_key(x)).map(|&i| &self.records[i])
    }

    fn insert(&mut self, record: EvalRecord) -> &EvalRecord {
        let key = point_key(record.x.as_slice());
        let idx = self.records.len();
        self.records.push(record);
        self.index.insert(key, idx);
        &self.records[idx]
    }
}

fn check_finite(function: &'static str, x: &[f64], values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteValue {
            function,
            point: x.to_vec(),
        })
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// Evaluates `problem` at `x`, consulting `db` first.
///
/// On a cache miss every evaluator is called exactly once and the new record
/// is appended to the database.
pub fn evaluate(problem: &Problem, db: &mut EvalDatabase, x: &[f64]) -> Result<EvalRecord> {
    check_len(problem.dim(), x.len())?;
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFiniteValue {
            function: "input",
            point: x.to_vec(),
        });
    }
    if let Some(rec) = db.get(x) {
        return Ok(rec.clone());
    }

    let f = problem.eval_objectives(x);
    let h = problem.eval_equalities(x);
    let g = problem.eval_inequalities(x);
    check_len(problem.num_obj(), f.len())?;
    check_len(problem.num_eq(), h.len())?;
    check_len(problem.num_ineq(), g.len())?;
    check_finite("f", x, &f)?;
    check_finite("h", x, &h)?;
    check_finite("g", x, &g)?;

    let theta = infeasibility(&h, &g);
    let phi = max_scalarization(&f);
    let record = EvalRecord {
        x: DVector::from_column_slice(x),
        f: DVector::from_vec(f),
        h: DVector::from_vec(h),
        g: DVector::from_vec(g),
        theta,
        phi,
    };
    Ok(db.insert(record).clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::two_parabolas;
    use std::sync::atomic::{AtomicUsize, Ordering};

    #[test]
    fn infeasibility_examples() {
        assert_eq!(infeasibility(&[], &[-3.25]), 0.0);
        assert_eq!(infeasibility(&[0.5, -2.0], &[]), 2.0);
        assert_eq!(infeasibility(&[0.1], &[0.3, -1.0]), 0.3);
        assert_eq!(infeasibility(&[], &[]), 0.0);
    }

    #[test]
    fn max_scalarization_examples() {
        assert_eq!(max_scalarization(&[1.0, 3.0, 2.0]), 3.0);
        assert_eq!(max_scalarization(&[-5.0]), -5.0);
    }

    #[test]
    fn evaluate_two_parabolas() {
        let p = two_parabolas();
        let mut db = EvalDatabase::new();
        let r = evaluate(&p, &mut db, &[2.0, 1.0]).unwrap();
        assert_eq!(r.f.as_slice(), &[0.0, 4.0]);
        assert_eq!(r.g.as_slice(), &[-4.0]);
        assert_eq!(r.theta, 0.0);
        assert_eq!(r.phi, 4.0);

        let r = evaluate(&p, &mut db, &[0.0, 0.0]).unwrap();
        assert_eq!(r.g.as_slice(), &[1.0]);
        assert_eq!(r.theta, 1.0);
    }

    #[test]
    fn cache_short_circuits_evaluators() {
        let calls = Arc::new(AtomicUsize::new(0));
        let c = Arc::clone(&calls);
        let p = Problem::new("count", 1, 1, move |x| {
            c.fetch_add(1, Ordering::SeqCst);
            vec![x[0] * x[0]]
        });
        let mut db = EvalDatabase::new();
        let a = evaluate(&p, &mut db, &[0.3]).unwrap();
        let b = evaluate(&p, &mut db, &[0.3]).unwrap();
        assert_eq!(a, b);
        assert_eq!(calls.load(Ordering::SeqCst), 1);
        assert_eq!(db.len(), 1);

        // -0.0 and 0.0 differ bitwise and are cached separately.
        evaluate(&p, &mut db, &[0.0]).unwrap();
        evaluate(&p, &mut db, &[-0.0]).unwrap();
        assert_eq!(calls.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn non_finite_values_are_rejected() {
        let p = Problem::new("log", 1, 1, |x| vec![x[0].ln()]);
        let mut db = EvalDatabase::new();
        let err = evaluate(&p, &mut db, &[-1.0]).unwrap_err();
        assert!(matches!(err, Error::NonFiniteValue { function: "f", .. }));
        assert!(db.is_empty());
        assert!(evaluate(&p, &mut db, &[f64::NAN]).is_err());
    }

    #[test]
    fn wrong_dimension() {
        let p = two_parabolas();
        let mut db = EvalDatabase::new();
        assert_eq!(
            evaluate(&p, &mut db, &[1.0]).unwrap_err(),
            Error::DimensionMismatch {
                expected: 2,
                got: 1
            }
        );
    }

    #[test]
    fn weighted_sum_keeps_constraints() {
        let p = two_parabolas().weighted_sum(&[0.5, 0.5]);
        assert_eq!(p.num_obj(), 1);
        assert_eq!(p.num_ineq(), 1);
        let f = p.eval_objectives(&[2.0, 0.0]);
        assert_eq!(f, vec![1.0]);
    }

    #[test]
    #[should_panic(expected = "nonnegative")]
    fn weighted_sum_rejects_negative_weights() {
        two_parabolas().weighted_sum(&[1.5, -0.5]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn theta_nonnegative_and_zero_iff_feasible(
                h in proptest::collection::vec(-5.0f64..5.0, 0..4),
                g in proptest::collection::vec(-5.0f64..5.0, 0..4),
            ) {
                let t = infeasibility(&h, &g);
                prop_assert!(t >= 0.0);
                let feasible = h.iter().all(|v| *v == 0.0) && g.iter().all(|v| *v <= 0.0);
                prop_assert_eq!(t == 0.0, feasible);
            }

            #[test]
            fn phi_monotone(f in proptest::collection::vec(-5.0f64..5.0, 1..5), i in 0usize..5, bump in 0.0f64..3.0) {
                let i = i % f.len();
                let mut up = f.clone();
                up[i] += bump;
                prop_assert!(max_scalarization(&up) >= max_scalarization(&f));
            }
        }
    }
}
