//! Fully linear surrogate models on trust regions.
//!
//! Every scalar function of a [`Problem`] (objectives, equalities,
//! inequalities) gets a [`ScalarModel`]; a [`SurrogateSet`] bundles them for
//! one center and construction radius. Three kinds are available:
//!
//! * `taylor1` / `taylor2`: central finite-difference Taylor polynomials,
//! * `rbf-cubic`: cubic radial basis function interpolants with a linear
//!   tail, built from database points near the center plus axis samples.

mod rbf;
mod taylor;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{EvalDatabase, Problem};
use crate::subproblem::LinearizedSet;

pub use rbf::{build_rbf, build_rbf_axis_only, RbfParams};
pub use taylor::build_taylor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "rbf-cubic")]
    RbfCubic,
    #[serde(rename = "taylor1")]
    Taylor1,
    #[serde(rename = "taylor2")]
    Taylor2,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::RbfCubic, ModelKind::Taylor1, ModelKind::Taylor2];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::RbfCubic => "rbf-cubic",
            ModelKind::Taylor1 => "taylor1",
            ModelKind::Taylor2 => "taylor2",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rbf-cubic" | "rbf" => Ok(ModelKind::RbfCubic),
            "taylor1" => Ok(ModelKind::Taylor1),
            "taylor2" => Ok(ModelKind::Taylor2),
            other => Err(Error::InvalidConfig(format!(
                "unknown model kind `{other}` (expected rbf-cubic, taylor1 or taylor2)"
            ))),
        }
    }
}

/// Interpolation nodes shared by all RBF models of one set, in scaled
/// coordinates `s = (x - center) / scale`.
#[derive(Debug)]
pub(crate) struct RbfNodes {
    pub(crate) scale: f64,
    pub(crate) nodes: Vec<DVector<f64>>,
}

#[derive(Debug, Clone)]
enum Repr {
    Taylor {
        value: f64,
        gradient: DVector<f64>,
        hessian: DMatrix<f64>,
    },
    Rbf {
        nodes: Arc<RbfNodes>,
        weights: DVector<f64>,
        /// `[c0, c_1..c_n]` of the linear tail in scaled coordinates.
        tail: DVector<f64>,
    },
}

/// A surrogate for one scalar function.
#[derive(Debug, Clone)]
pub struct ScalarModel {
    kind: ModelKind,
    center: DVector<f64>,
    radius: f64,
    repr: Repr,
}

impl ScalarModel {
    pub(crate) fn taylor(
        kind: ModelKind,
        center: DVector<f64>,
        radius: f64,
        value: f64,
        gradient: DVector<f64>,
        hessian: DMatrix<f64>,
    ) -> Self {
        Self {
            kind,
            center,
            radius,
            repr: Repr::Taylor {
                value,
                gradient,
                hessian,
            },
        }
    }

    pub(crate) fn rbf(
        center: DVector<f64>,
        radius: f64,
        nodes: Arc<RbfNodes>,
        weights: DVector<f64>,
        tail: DVector<f64>,
    ) -> Self {
        Self {
            kind: ModelKind::RbfCubic,
            center,
            radius,
            repr: Repr::Rbf {
                nodes,
                weights,
                tail,
            },
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        match &self.repr {
            Repr::Taylor {
                value,
                gradient,
                hessian,
            } => {
                let s = x - &self.center;
                value + gradient.dot(&s) + 0.5 * s.dot(&(hessian * &s))
            }
            Repr::Rbf {
                nodes,
                weights,
                tail,
            } => {
                let s = (x - &self.center) / nodes.scale;
                let kernel: f64 = nodes
                    .nodes
                    .iter()
                    .zip(weights.iter())
                    .map(|(c, w)| w * (&s - c).norm().powi(3))
                    .sum();
                kernel + tail[0] + tail.rows(1, s.len()).dot(&s)
            }
        }
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        match &self.repr {
            Repr::Taylor {
                gradient, hessian, ..
            } => gradient + hessian * (x - &self.center),
            Repr::Rbf {
                nodes,
                weights,
                tail,
            } => {
                let s = (x - &self.center) / nodes.scale;
                let mut g = tail.rows(1, s.len()).into_owned();
                for (c, w) in nodes.nodes.iter().zip(weights.iter()) {
                    let r = &s - c;
                    g += (3.0 * w * r.norm()) * r;
                }
                g / nodes.scale
            }
        }
    }

    pub fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        match &self.repr {
            Repr::Taylor { hessian, .. } => hessian.clone(),
            Repr::Rbf { nodes, weights, .. } => {
                let n = x.len();
                let s = (x - &self.center) / nodes.scale;
                let mut h = DMatrix::zeros(n, n);
                for (c, w) in nodes.nodes.iter().zip(weights.iter()) {
                    let r = &s - c;
                    let rn = r.norm();
                    if rn > 0.0 {
                        h += 3.0 * w * (DMatrix::identity(n, n) * rn + &r * r.transpose() / rn);
                    }
                }
                h / (nodes.scale * nodes.scale)
            }
        }
    }
}

/// Models for every component of `f`, `h` and `g` sharing one center.
#[derive(Debug, Clone)]
pub struct SurrogateSet {
    pub kind: ModelKind,
    pub center: DVector<f64>,
    pub radius: f64,
    pub fully_linear: bool,
    pub objectives: Vec<ScalarModel>,
    pub equalities: Vec<ScalarModel>,
    pub inequalities: Vec<ScalarModel>,
}

fn stack_values(models: &[ScalarModel], x: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(models.len(), models.iter().map(|m| m.value(x)))
}

fn stack_gradients(models: &[ScalarModel], x: &DVector<f64>, n: usize) -> DMatrix<f64> {
    let mut jac = DMatrix::zeros(models.len(), n);
    for (i, m) in models.iter().enumerate() {
        jac.row_mut(i).copy_from(&m.gradient(x).transpose());
    }
    jac
}

impl SurrogateSet {
    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn objective_values(&self, x: &DVector<f64>) -> DVector<f64> {
        stack_values(&self.objectives, x)
    }

    /// Max-scalarization of the objective models.
    pub fn scalarized(&self, x: &DVector<f64>) -> f64 {
        self.objectives
            .iter()
            .map(|m| m.value(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn objective_jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        stack_gradients(&self.objectives, x, self.dim())
    }

    pub fn equality_values(&self, x: &DVector<f64>) -> DVector<f64> {
        stack_values(&self.equalities, x)
    }

    pub fn equality_jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        stack_gradients(&self.equalities, x, self.dim())
    }

    pub fn inequality_values(&self, x: &DVector<f64>) -> DVector<f64> {
        stack_values(&self.inequalities, x)
    }

    pub fn inequality_jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        stack_gradients(&self.inequalities, x, self.dim())
    }

    /// Linearized constraint set at the model center.
    pub fn linearize(&self) -> LinearizedSet {
        let x = &self.center;
        LinearizedSet {
            eq_jacobian: self.equality_jacobian(x),
            eq_values: self.equality_values(x),
            ineq_jacobian: self.inequality_jacobian(x),
            ineq_values: self.inequality_values(x),
        }
    }

    /// All scalar models in `f, h, g` order.
    pub fn components(&self) -> impl Iterator<Item = &ScalarModel> {
        self.objectives
            .iter()
            .chain(&self.equalities)
            .chain(&self.inequalities)
    }
}

/// Builds a fully linear set of the requested kind at `(x, delta)`.
///
/// Singular RBF systems are retried with the center and fresh axis points
/// only.
pub fn build_models(
    kind: ModelKind,
    problem: &Problem,
    db: &mut EvalDatabase,
    x: &DVector<f64>,
    delta: f64,
) -> Result<SurrogateSet> {
    match kind {
        ModelKind::Taylor1 => build_taylor(problem, db, x, delta, 1),
        ModelKind::Taylor2 => build_taylor(problem, db, x, delta, 2),
        ModelKind::RbfCubic => match build_rbf(problem, db, x, delta, &RbfParams::default()) {
            Err(Error::SingularInterpolation { .. }) => {
                log::debug!("singular RBF system at radius {delta:e}, using axis points");
                build_rbf_axis_only(problem, db, x, delta)
            }
            other => other,
        },
    }
}

/// Returns a set that is fully linear on `B(x, delta)`.
///
/// A set already fully linear at the same center for some radius
/// `<= delta` is returned unchanged; otherwise the set is rebuilt.
pub fn make_fully_linear(
    set: &SurrogateSet,
    problem: &Problem,
    db: &mut EvalDatabase,
    x: &DVector<f64>,
    delta: f64,
) -> Result<SurrogateSet> {
    if set.fully_linear && &set.center == x && delta >= set.radius {
        return Ok(set.clone());
    }
    build_models(set.kind, problem, db, x, delta)
}

/// Selects one scalar output of a problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Output {
    Objective(usize),
    Equality(usize),
    Inequality(usize),
}

impl Output {
    fn true_value(self, problem: &Problem, x: &[f64]) -> f64 {
        match self {
            Output::Objective(i) => problem.eval_objectives(x)[i],
            Output::Equality(i) => problem.eval_equalities(x)[i],
            Output::Inequality(i) => problem.eval_inequalities(x)[i],
        }
    }

    fn model(self, set: &SurrogateSet) -> &ScalarModel {
        match self {
            Output::Objective(i) => &set.objectives[i],
            Output::Equality(i) => &set.equalities[i],
            Output::Inequality(i) => &set.inequalities[i],
        }
    }
}

/// `count` points drawn uniformly from the unit ball in `R^n`.
pub fn unit_ball_samples(n: usize, count: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v = DVector::from_fn(n, |_, _| rng.random_range(-1.0..=1.0));
        if v.norm() <= 1.0 {
            out.push(v);
        }
    }
    out
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Maximum `|f - m|` over 32 uniform samples of `B(x, delta)` for a freshly
/// built model, one entry per radius.
pub fn value_errors(
    problem: &Problem,
    kind: ModelKind,
    x: &DVector<f64>,
    radii: &[f64],
    output: Output,
    seed: u64,
) -> Result<Vec<f64>> {
    let samples = unit_ball_samples(x.len(), 32, seed);
    radii
        .iter()
        .map(|&delta| {
            let mut db = EvalDatabase::new();
            let set = build_models(kind, problem, &mut db, x, delta)?;
            let model = output.model(&set);
            Ok(samples
                .iter()
                .map(|u| {
                    let xi = x + u * delta;
                    (output.true_value(problem, xi.as_slice()) - model.value(&xi)).abs()
                })
                .fold(0.0, f64::max))
        })
        .collect()
}

/// Estimates the decay order of the model value error as the radius
/// shrinks: the slope of `log(error)` against `log(delta)`.
///
/// `radii` must be strictly decreasing with at least four entries.
pub fn error_slope_probe(
    problem: &Problem,
    kind: ModelKind,
    x: &DVector<f64>,
    radii: &[f64],
    output: Output,
    seed: u64,
) -> Result<f64> {
    if radii.len() < 4 || radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidConfig(
            "slope probe needs at least four strictly decreasing radii".into(),
        ));
    }
    let errors = value_errors(problem, kind, x, radii, output, seed)?;
    let logs_d: Vec<f64> = radii.iter().map(|d| d.ln()).collect();
    let logs_e: Vec<f64> = errors
        .iter()
        .map(|e| e.max(f64::MIN_POSITIVE).ln())
        .collect();
    Ok(fit_slope(&logs_d, &logs_e))
}
