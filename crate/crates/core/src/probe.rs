//! Randomized property suites exercising the building blocks.
//!
//! Each suite returns one [`PropertyCheck`] per property; a suite passes
//! iff every check passes.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::benchmarks::two_parabolas;
use crate::config::Config;
use crate::driver::backtracking_stepsize;
use crate::filter::FilterSet;
use crate::problem::{EvalDatabase, Problem};
use crate::subproblem::{kkt_residual, lp_tangential, omega_norm_ratio_probe, LinearizedSet};
use crate::surrogate::{build_taylor, error_slope_probe, ModelKind, Output};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Duality,
    Slopes,
    Filter,
    Norms,
    Armijo,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Duality, Suite::Slopes, Suite::Filter, Suite::Norms, Suite::Armijo];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Duality => "duality",
            Suite::Slopes => "slopes",
            Suite::Filter => "filter",
            Suite::Norms => "norms",
            Suite::Armijo => "armijo",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.as_str() == s)
            .ok_or_else(|| format!("unknown suite `{s}` (expected duality, slopes, filter, norms or armijo)"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl PropertyCheck {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for PropertyCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> Vec<PropertyCheck> {
    match suite {
        Suite::Duality => duality_suite(seed, 200),
        Suite::Slopes => slopes_suite(seed),
        Suite::Filter => filter_suite(seed, 1000),
        Suite::Norms => norms_suite(seed, 100),
        Suite::Armijo => armijo_suite(seed, 100),
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

/// A random tangential LP instance centered at a point of the linearized
/// set: equality values vanish and inequality values are non-positive,
/// with roughly half of them active. Every third instance is built to be
/// critical (`omega = 0`).
pub fn random_tangential_instance(rng: &mut ChaCha8Rng) -> (DMatrix<f64>, LinearizedSet) {
    let n = rng.random_range(1..=6);
    let k = rng.random_range(1..=4);
    let m_eq = rng.random_range(0..=n.min(3) - 1);
    let p = rng.random_range(0..=6 - m_eq);
    let mut f = random_matrix(rng, k, n);
    let h = random_matrix(rng, m_eq, n);
    let g = random_matrix(rng, p, n);
    let mut g_values = DVector::from_fn(p, |_, _| {
        if rng.random_bool(0.5) {
            0.0
        } else {
            -rng.random_range(0.0..1.0)
        }
    });

    if rng.random_range(0..3) == 0 {
        if k >= 2 {
            let row = -f.row(0);
            f.set_row(k - 1, &row);
        } else if p > 0 {
            let row = -g.row(0);
            f.set_row(0, &row);
            g_values[0] = 0.0;
        }
    }

    let lin = LinearizedSet::new(h, DVector::zeros(m_eq), g, g_values);
    (f, lin)
}

pub fn duality_suite(seed: u64, count: usize) -> Vec<PropertyCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_gap: f64 = 0.0;
    let mut worst_stat: f64 = 0.0;
    let mut critical = 0;
    let mut failures = 0;
    for _ in 0..count {
        let (f, lin) = random_tangential_instance(&mut rng);
        match lp_tangential(&f, &lin) {
            Ok(sol) => {
                worst_gap = worst_gap.max(sol.duality_gap());
                if sol.omega <= 1e-10 {
                    critical += 1;
                    let (stat, _) = kkt_residual(&f, &lin.eq_jacobian, &lin.ineq_jacobian, &lin.ineq_values, &sol);
                    worst_stat = worst_stat.max(stat);
                }
            }
            Err(_) => failures += 1,
        }
    }
    vec![
        PropertyCheck::new(
            "strong duality",
            failures == 0 && worst_gap <= 1e-8,
            format!("{count} LPs, max |primal - dual| = {worst_gap:.3e}, {failures} solver failures"),
        ),
        PropertyCheck::new(
            "multiplier stationarity",
            critical > 0 && worst_stat <= 1e-8,
            format!("{critical} critical instances, max stationarity = {worst_stat:.3e}"),
        ),
    ]
}

pub fn slopes_suite(seed: u64) -> Vec<PropertyCheck> {
    let problem = two_parabolas();
    let radii = [0.5, 0.25, 0.125, 0.0625];
    let points = [[-2.0, 0.5], [1.5, -0.3]];
    let mut out = Vec::new();
    for kind in [ModelKind::RbfCubic, ModelKind::Taylor1] {
        for (label, output) in [("f1", Output::Objective(0)), ("g", Output::Inequality(0))] {
            let mut worst = f64::INFINITY;
            let mut error = None;
            for x in points {
                match error_slope_probe(&problem, kind, &DVector::from_column_slice(&x), &radii, output, seed) {
                    Ok(s) => worst = worst.min(s),
                    Err(e) => error = Some(e.to_string()),
                }
            }
            let detail = match &error {
                Some(e) => e.clone(),
                None => format!("min slope {worst:.3}"),
            };
            out.push(PropertyCheck::new(
                format!("value error decay {kind} {label}"),
                error.is_none() && worst >= 1.8,
                detail,
            ));
        }
    }
    out
}

/// Number of ordered pairs `(i, j)` with `theta_j >= theta_i` and
/// `phi_j - g theta_j >= phi_i - g theta_i`, found by a full pairwise scan.
pub fn brute_force_dominated(entries: &[(f64, f64)], gamma_theta: f64) -> usize {
    let mut count = 0;
    for (i, &(ti, pi)) in entries.iter().enumerate() {
        for (j, &(tj, pj)) in entries.iter().enumerate() {
            if i != j && tj >= ti && pj - gamma_theta * tj >= pi - gamma_theta * ti {
                count += 1;
            }
        }
    }
    count
}

pub fn filter_suite(seed: u64, adds: usize) -> Vec<PropertyCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut filter = FilterSet::new(1e-4);
    let mut added = Vec::with_capacity(adds);
    let mut errors = 0;
    let mut max_dominated = 0;
    for _ in 0..adds {
        let theta = rng.random_range(1e-6..10.0f64);
        let phi = rng.random_range(-5.0..5.0);
        if filter.add(theta, phi).is_err() {
            errors += 1;
        }
        added.push((theta, phi));
        max_dominated = max_dominated.max(brute_force_dominated(filter.entries(), filter.gamma_theta()));
    }
    let self_acceptable = added.iter().filter(|&&(t, p)| filter.acceptable(t, p)).count();
    vec![
        PropertyCheck::new(
            "no envelope-dominated pairs",
            errors == 0 && max_dominated == 0,
            format!(
                "{adds} adds, {} entries kept, worst scan found {max_dominated} dominated pairs",
                filter.len()
            ),
        ),
        PropertyCheck::new(
            "added pairs are unacceptable",
            self_acceptable == 0,
            format!("{self_acceptable} of {adds} added pairs acceptable"),
        ),
    ]
}

pub fn norms_suite(seed: u64, count: usize) -> Vec<PropertyCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut violations = 0;
    let mut failures = 0;
    for _ in 0..count {
        let (f, lin) = random_tangential_instance(&mut rng);
        let n = f.ncols() as f64;
        match omega_norm_ratio_probe(&f, &lin) {
            Ok(r) => {
                lo = lo.min(r);
                hi = hi.max(r);
                if r < 1.0 / n.sqrt() - 1e-12 || r > 1.0 + 1e-12 {
                    violations += 1;
                }
            }
            Err(_) => failures += 1,
        }
    }
    vec![PropertyCheck::new(
        "ratio within [1/sqrt(n), 1]",
        violations == 0 && failures == 0,
        format!("{count} instances, ratio range [{lo:.4}, {hi:.4}], {violations} out of range, {failures} solver failures"),
    )]
}

/// Random convex quadratic objectives in `n` variables.
fn random_quadratic_problem(rng: &mut ChaCha8Rng) -> Problem {
    let n = rng.random_range(1..=4);
    let k = rng.random_range(1..=3);
    let params: Vec<(DVector<f64>, DVector<f64>)> = (0..k)
        .map(|_| {
            let center = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
            let scales = DVector::from_fn(n, |_, _| rng.random_range(0.1..3.0));
            (center, scales)
        })
        .collect();
    Problem::new("random-quadratic", n, k, move |x| {
        params
            .iter()
            .map(|(c, s)| (0..x.len()).map(|i| s[i] * (x[i] - c[i]).powi(2)).sum())
            .collect()
    })
}

pub fn armijo_suite(seed: u64, count: usize) -> Vec<PropertyCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = Config::default();
    let mut calls = 0;
    let mut violations = 0;
    let mut not_minimal = 0;
    let mut exhausted = 0;
    while calls < count {
        let problem = random_quadratic_problem(&mut rng);
        let n = problem.dim();
        let x = DVector::from_fn(n, |_, _| rng.random_range(-3.0..3.0));
        let Ok(models) = build_taylor(&problem, &mut EvalDatabase::new(), &x, 1.0, 2) else {
            continue;
        };
        let f_jac = models.objective_jacobian(&x);
        let Ok(sol) = lp_tangential(&f_jac, &LinearizedSet::unconstrained(n)) else {
            continue;
        };
        if sol.omega <= 0.0 || sol.d.norm() == 0.0 {
            continue;
        }
        calls += 1;
        let sigma_bar = rng.random_range(0.01..8.0);
        let (s, j) = backtracking_stepsize(&models, &x, &sol.d, sigma_bar, sol.omega, &cfg);
        if s == 0.0 {
            exhausted += 1;
            continue;
        }
        let decrease = |s: f64| {
            let trial = &x + &sol.d * s;
            let now = models.objective_values(&x).max();
            let then = models.objective_values(&trial).max();
            now - then
        };
        let expected = cfg.b_armijo.powi(j as i32) * sigma_bar / sol.d.norm();
        if (s - expected).abs() > 1e-15 * expected || decrease(s) < cfg.a_armijo * s * sol.omega {
            violations += 1;
        }
        if j > 0 {
            let prev = s / cfg.b_armijo;
            if decrease(prev) >= cfg.a_armijo * prev * sol.omega {
                not_minimal += 1;
            }
        }
    }
    vec![
        PropertyCheck::new(
            "sufficient decrease holds",
            violations == 0 && exhausted == 0,
            format!("{count} calls, {violations} violations, {exhausted} exhausted"),
        ),
        PropertyCheck::new(
            "smallest admissible exponent",
            not_minimal == 0,
            format!("{not_minimal} calls accepted a later exponent than necessary"),
        ),
    ]
}
