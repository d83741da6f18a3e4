//! The trust-region filter loop.

mod criticality;
mod restoration;
mod steps;

use nalgebra::DVector;
use serde::Serialize;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::filter::FilterSet;
use crate::problem::{evaluate, EvalDatabase, EvalRecord, Problem};
use crate::subproblem::{
    initial_steplength, kkt_residual, lp_tangential, normal_step, LinearizedSet, TangentialSolution,
};
use crate::surrogate::{build_models, build_taylor, SurrogateSet};

pub use criticality::{criticality_routine, CritOutcome};
pub use restoration::{restoration, RestorationOutcome};
pub use steps::{
    armijo_holds, backtracking_stepsize, model_decrease_test, radius_update, ratio_rho, stopping_check,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Converged,
    MaxIter,
    RestorationFailed,
    CritLoopStop,
    /// A hard error (non-finite value, degenerate model) ended the run.
    Aborted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IterationKind {
    Successful,
    ThetaIteration,
    Inacceptable,
    Restoration,
    Critloop,
}

impl IterationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            IterationKind::Successful => "successful",
            IterationKind::ThetaIteration => "theta-iteration",
            IterationKind::Inacceptable => "inacceptable",
            IterationKind::Restoration => "restoration",
            IterationKind::Critloop => "critloop",
        }
    }
}

/// One row of the iteration trace. `x`, `theta`, `phi` describe the
/// iterate at the start of the iteration; `chi` is NaN when not computed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationLog {
    pub k: usize,
    pub kind: IterationKind,
    pub x: Vec<f64>,
    pub theta: f64,
    pub phi: f64,
    pub chi: f64,
    pub delta_bar: f64,
    pub delta: f64,
    pub rho: Option<f64>,
    pub n_norm: f64,
    pub sigma: f64,
    pub evals_cumulative: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterSnapshot {
    pub k: usize,
    pub entries: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub status: Status,
    pub x_final: Vec<f64>,
    pub record_final: EvalRecord,
    pub kkt_stationarity: Option<f64>,
    pub kkt_complementarity: Option<f64>,
    /// Criticality value of the certificate LP at the final point.
    pub omega_final: Option<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub log: Vec<IterationLog>,
    pub filter_history: Vec<FilterSnapshot>,
    pub message: Option<String>,
}

impl RunResult {
    pub fn count(&self, kind: IterationKind) -> usize {
        self.log.iter().filter(|l| l.kind == kind).count()
    }
}

/// Mutable state of the iteration.
#[derive(Debug, Clone)]
pub struct TrState {
    pub k: usize,
    pub record: EvalRecord,
    pub delta_bar: f64,
    pub delta: f64,
    pub n_step: Option<DVector<f64>>,
    pub tangential: Option<TangentialSolution>,
    pub chi_bar: f64,
    pub chi: f64,
    pub models: SurrogateSet,
    pub filter: FilterSet,
}

impl TrState {
    /// Evaluates `x0` and builds models on `B(x0, delta0)`.
    pub fn new(problem: &Problem, db: &mut EvalDatabase, x0: &[f64], cfg: &Config) -> Result<Self> {
        let record = evaluate(problem, db, x0)?;
        let models = build_models(cfg.model_kind, problem, db, &record.x, cfg.delta0)?;
        Ok(Self {
            k: 0,
            record,
            delta_bar: cfg.delta0,
            delta: cfg.delta0,
            n_step: None,
            tangential: None,
            chi_bar: f64::NAN,
            chi: f64::NAN,
            models,
            filter: FilterSet::new(cfg.gamma_theta),
        })
    }

    pub fn x(&self) -> &DVector<f64> {
        &self.record.x
    }

    pub fn x_n(&self) -> DVector<f64> {
        match &self.n_step {
            Some(n) => &self.record.x + n,
            None => self.record.x.clone(),
        }
    }

    pub fn n_norm(&self) -> f64 {
        self.n_step.as_ref().map_or(f64::NAN, |n| n.norm())
    }

    /// Normal step from the current models; `true` iff it exists and is
    /// compatible with `delta_bar`.
    pub fn update_normal_step(&mut self, cfg: &Config) -> bool {
        self.n_step = normal_step(&self.models.linearize()).ok();
        self.n_step
            .as_ref()
            .is_some_and(|n| n.norm() <= cfg.compatibility_bound(self.delta_bar))
    }

    pub fn linearized_at_x_n(&self) -> LinearizedSet {
        let lin = self.models.linearize();
        match &self.n_step {
            Some(n) => lin.shifted(n),
            None => lin,
        }
    }

    /// Tangential LP at `x_n`; sets `chi`.
    pub fn update_tangential(&mut self) -> Result<()> {
        let f_jac = self.models.objective_jacobian(&self.x_n());
        let sol = lp_tangential(&f_jac, &self.linearized_at_x_n())?;
        self.chi = sol.chi;
        self.tangential = Some(sol);
        Ok(())
    }

    /// Steps 1 and 3 at the current iterate for callers outside the loop.
    pub fn prepare(&mut self, cfg: &Config) -> Result<bool> {
        if !self.update_normal_step(cfg) {
            return Ok(false);
        }
        self.delta = self.delta_bar;
        self.update_tangential()?;
        self.chi_bar = self.chi;
        Ok(true)
    }

    fn log_row(&self, kind: IterationKind, db: &EvalDatabase) -> IterationLog {
        IterationLog {
            k: self.k,
            kind,
            x: self.record.x.iter().copied().collect(),
            theta: self.record.theta,
            phi: self.record.phi,
            chi: self.chi,
            delta_bar: self.delta_bar,
            delta: self.delta,
            rho: None,
            n_norm: self.n_norm(),
            sigma: 0.0,
            evals_cumulative: db.len(),
        }
    }
}

/// KKT residuals at `x` from finite-difference linearizations.
///
/// Evaluations go to a scratch copy of the database and are not counted.
pub fn kkt_certificate(problem: &Problem, db: &EvalDatabase, x: &DVector<f64>) -> Option<(f64, f64, f64)> {
    let mut scratch = db.clone();
    let rec = evaluate(problem, &mut scratch, x.as_slice()).ok()?;
    let set = build_taylor(problem, &mut scratch, x, 1.0, 1).ok()?;
    let lin = set.linearize();
    let n = normal_step(&lin).ok()?;
    let f_jac = set.objective_jacobian(&(x + &n));
    let sol = lp_tangential(&f_jac, &lin.shifted(&n)).ok()?;
    let (stat, comp) = kkt_residual(
        &f_jac,
        &lin.eq_jacobian,
        &lin.ineq_jacobian,
        &rec.g,
        &sol,
    );
    Some((stat, comp, sol.omega))
}

enum Outcome {
    Continue,
    Stop(Status),
}

fn iterate(
    problem: &Problem,
    db: &mut EvalDatabase,
    cfg: &Config,
    state: &mut TrState,
    log: &mut Vec<IterationLog>,
) -> Result<Outcome> {
    let (theta_k, phi_k) = (state.record.theta, state.record.phi);
    state.chi = f64::NAN;
    state.chi_bar = f64::NAN;
    state.delta = state.delta_bar;

    // steps 1-2: compatibility and restoration
    let compatible = match &state.n_step {
        Some(n) => n.norm() <= cfg.compatibility_bound(state.delta_bar),
        None => state.update_normal_step(cfg),
    };
    if !compatible {
        if theta_k > 0.0 {
            state.filter.add(theta_k, phi_k)?;
        }
        let row = state.log_row(IterationKind::Restoration, db);
        let out = restoration(problem, db, cfg, &state.filter, &state.record, &state.models, state.delta_bar)?;
        log.push(IterationLog {
            sigma: 0.0,
            evals_cumulative: db.len(),
            ..row
        });
        state.record = out.record;
        state.delta_bar = out.delta_bar;
        state.models = out.models;
        state.n_step = Some(out.n_step);
        state.tangential = None;
        return Ok(Outcome::Continue);
    }

    // step 3: tangential step
    if let Err(e) = state.update_tangential() {
        log::debug!("k={}: tangential step failed ({e}), shrinking", state.k);
        log.push(state.log_row(IterationKind::Inacceptable, db));
        shrink_and_rebuild(problem, db, cfg, state)?;
        return Ok(Outcome::Continue);
    }
    state.chi_bar = state.chi;

    // step 4: criticality test
    if theta_k < cfg.eps_theta
        && state.chi_bar < cfg.eps_chi
        && state.delta_bar > cfg.m_crit * state.chi_bar
    {
        let out = criticality_routine(problem, db, cfg, state, log)?;
        if out.hit_cap || cfg.stop_on_crit_loop {
            return Ok(Outcome::Stop(Status::CritLoopStop));
        }
    }

    // step 5: trial point
    let n = state.n_step.clone().expect("compatible normal step");
    let tangential = state.tangential.clone().expect("tangential step");
    let x_k = state.record.x.clone();
    let x_n = &x_k + &n;
    let d = &tangential.d;
    let sigma = if tangential.omega > 0.0 && d.norm() > 0.0 {
        let sigma_bar = initial_steplength(&n, d, state.delta, &state.linearized_at_x_n())?;
        backtracking_stepsize(&state.models, &x_n, d, sigma_bar, tangential.omega, cfg).0
    } else {
        0.0
    };
    let x_trial = &x_n + d * sigma;
    let trial = evaluate(problem, db, x_trial.as_slice())?;

    let phi_m_k = state.models.scalarized(&x_k);
    let phi_m_trial = state.models.scalarized(&x_trial);
    let md_ok = model_decrease_test(phi_m_k, phi_m_trial, theta_k, cfg);
    let rho = ratio_rho(phi_k, trial.phi, phi_m_k, phi_m_trial).ok();
    let filter_ok = state
        .filter
        .augmented_acceptable(theta_k, phi_k, trial.theta, trial.phi);
    let reject = !filter_ok || (md_ok && rho.is_none_or(|r| r < cfg.nu1));

    let kind = if reject {
        IterationKind::Inacceptable
    } else if md_ok {
        IterationKind::Successful
    } else {
        IterationKind::ThetaIteration
    };
    log.push(IterationLog {
        rho,
        sigma,
        evals_cumulative: db.len(),
        ..state.log_row(kind, db)
    });

    if reject {
        shrink_and_rebuild(problem, db, cfg, state)?;
        return Ok(Outcome::Continue);
    }

    // steps 6-8
    if kind == IterationKind::ThetaIteration && theta_k > 0.0 {
        state.filter.add(theta_k, phi_k)?;
    }
    let converged = stopping_check(&x_k, &trial.x, &state.record.f, &trial.f, cfg);
    state.delta_bar = radius_update(state.delta, rho.unwrap_or(f64::NEG_INFINITY), cfg);
    state.record = trial;
    rebuild(problem, db, cfg, state)?;
    Ok(if converged {
        Outcome::Stop(Status::Converged)
    } else {
        Outcome::Continue
    })
}

fn rebuild(problem: &Problem, db: &mut EvalDatabase, cfg: &Config, state: &mut TrState) -> Result<()> {
    state.models = build_models(cfg.model_kind, problem, db, &state.record.x, state.delta_bar)?;
    state.n_step = None;
    state.tangential = None;
    Ok(())
}

fn shrink_and_rebuild(problem: &Problem, db: &mut EvalDatabase, cfg: &Config, state: &mut TrState) -> Result<()> {
    state.delta_bar = cfg.gamma1 * state.delta;
    rebuild(problem, db, cfg, state)
}

/// Runs the method from `x0`, recording every evaluation in `db`.
pub fn solve_with_db(problem: &Problem, db: &mut EvalDatabase, x0: &[f64], cfg: &Config) -> Result<RunResult> {
    cfg.validate()?;
    let mut state = TrState::new(problem, db, x0, cfg)?;
    let mut log = Vec::new();
    let mut filter_history = Vec::new();
    let mut status = Status::MaxIter;
    let mut message = None;
    let mut iterations = 0;

    for k in 0..cfg.max_iter {
        state.k = k;
        iterations = k + 1;
        let outcome = iterate(problem, db, cfg, &mut state, &mut log);
        filter_history.push(FilterSnapshot {
            k,
            entries: state.filter.entries().to_vec(),
        });
        match outcome {
            Ok(Outcome::Continue) => {}
            Ok(Outcome::Stop(s)) => {
                status = s;
                break;
            }
            Err(e) => {
                status = match e {
                    Error::RestorationFailed { .. } => Status::RestorationFailed,
                    _ => Status::Aborted,
                };
                message = Some(e.to_string());
                break;
            }
        }
    }

    let certificate = kkt_certificate(problem, db, &state.record.x);
    Ok(RunResult {
        status,
        x_final: state.record.x.iter().copied().collect(),
        record_final: state.record.clone(),
        kkt_stationarity: certificate.map(|c| c.0),
        kkt_complementarity: certificate.map(|c| c.1),
        omega_final: certificate.map(|c| c.2),
        iterations,
        evaluations: db.len(),
        log,
        filter_history,
        message,
    })
}

pub fn solve(problem: &Problem, x0: &[f64], cfg: &Config) -> Result<RunResult> {
    solve_with_db(problem, &mut EvalDatabase::new(), x0, cfg)
}

/// Solves the single-objective problem with objective `w^T f`.
pub fn weighted_sum_baseline(problem: &Problem, weights: &[f64], x0: &[f64], cfg: &Config) -> Result<RunResult> {
    solve(&problem.weighted_sum(weights), x0, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surrogate::ModelKind;

    #[test]
    fn convex_quadratic_single_objective() {
        let p = Problem::new("bowl", 2, 1, |x| {
            let (u, v) = (x[0] - 1.0, x[1] + 0.5);
            vec![u * u + 2.0 * v * v + 0.5 * u * v]
        });
        let cfg = Config {
            stop_on_crit_loop: false,
            max_iter: 30,
            ..Config::default().with_model(ModelKind::Taylor2)
        };
        let res = solve(&p, &[3.0, 2.0], &cfg).unwrap();
        let err = ((res.x_final[0] - 1.0).powi(2) + (res.x_final[1] + 0.5).powi(2)).sqrt();
        // the max-norm tangential direction zig-zags, so only 1e-4 is reached
        assert_eq!(res.status, Status::Converged);
        assert!(err <= 1e-4, "{:?} {:?} err {err}", res.status, res.x_final);
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = Config {
            gamma1: 2.0,
            ..Config::default()
        };
        assert!(matches!(
            solve(&crate::benchmarks::two_parabolas(), &[-2.0, 0.5], &cfg),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn radius_sandwich_and_filter_discipline() {
        for kind in ModelKind::ALL {
            let cfg = Config::default().with_model(kind);
            let res = solve(&crate::benchmarks::two_parabolas(), &[-2.0, 0.5], &cfg).unwrap();
            for row in &res.log {
                assert!(0.0 < row.delta && row.delta <= row.delta_bar && row.delta_bar <= cfg.delta_max);
            }
            for snap in &res.filter_history {
                assert!(snap.entries.iter().all(|e| e.0 > 0.0));
            }
        }
    }
}
