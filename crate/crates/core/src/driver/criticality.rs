use crate::config::Config;
use crate::error::Result;
use crate::problem::{EvalDatabase, Problem};
use crate::surrogate::build_models;

use super::{IterationKind, IterationLog, TrState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CritOutcome {
    /// Number of completed radius reductions.
    pub sub_iterations: usize,
    /// Radius `delta_j` of the models kept at exit.
    pub delta_j: f64,
    /// The sub-iteration cap was reached.
    pub hit_cap: bool,
    /// Left because the shrunken normal step became incompatible.
    pub broke: bool,
}

/// Shrinks the model radius until `delta_j <= M chi_j`, then sets
/// `state.delta = min{max{delta_j, B chi_j}, delta_bar}`.
///
/// Expects `state` to hold a compatible normal step and a tangential
/// solution for `delta_0 = state.delta_bar`. Each reduction is logged as a
/// `critloop` row.
pub fn criticality_routine(
    problem: &Problem,
    db: &mut EvalDatabase,
    cfg: &Config,
    state: &mut TrState,
    log: &mut Vec<IterationLog>,
) -> Result<CritOutcome> {
    let mut delta_j = state.delta_bar;
    let mut j = 0;
    let mut hit_cap = false;
    let mut broke = false;

    while delta_j > cfg.m_crit * state.chi {
        if j == cfg.crit_max_iter {
            hit_cap = true;
            break;
        }
        let delta_next = cfg.alpha_crit * delta_j;
        let models = build_models(cfg.model_kind, problem, db, &state.record.x, delta_next)?;
        let mut trial = state.clone();
        trial.models = models;
        trial.delta_bar = delta_next;
        if !trial.update_normal_step(cfg) {
            broke = true;
            break;
        }
        trial.update_tangential()?;
        trial.delta_bar = state.delta_bar;

        state.models = trial.models;
        state.n_step = trial.n_step;
        state.tangential = trial.tangential;
        state.chi = trial.chi;
        delta_j = delta_next;
        j += 1;
        state.delta = delta_j;
        log.push(IterationLog {
            ..state.log_row(IterationKind::Critloop, db)
        });
    }

    state.delta = delta_j.max(cfg.b_crit * state.chi).min(state.delta_bar);
    Ok(CritOutcome {
        sub_iterations: j,
        delta_j,
        hit_cap,
        broke,
    })
}
