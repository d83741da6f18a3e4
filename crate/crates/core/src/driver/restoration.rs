use nalgebra::DVector;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::filter::FilterSet;
use crate::problem::{evaluate, EvalDatabase, EvalRecord, Problem};
use crate::subproblem::normal_step;
use crate::surrogate::{build_models, SurrogateSet};

#[derive(Debug, Clone)]
pub struct RestorationOutcome {
    pub record: EvalRecord,
    pub delta_bar: f64,
    pub models: SurrogateSet,
    pub n_step: DVector<f64>,
}

/// Compatible normal step of fresh models at `(x, delta_bar)`, if any.
fn compatible_at(
    problem: &Problem,
    db: &mut EvalDatabase,
    cfg: &Config,
    x: &DVector<f64>,
    delta_bar: f64,
) -> Result<Option<(SurrogateSet, DVector<f64>)>> {
    let models = build_models(cfg.model_kind, problem, db, x, delta_bar)?;
    Ok(normal_step(&models.linearize())
        .ok()
        .filter(|n| n.norm() <= cfg.compatibility_bound(delta_bar))
        .map(|n| (models, n)))
}

/// Compass search on `theta` from `start` until a point is acceptable to
/// `filter` and admits a compatible normal step for `delta_bar` (or, as a
/// fallback, for `gamma2 delta_bar`).
///
/// `models` are the current models at `start`; when they already yield a
/// compatible step and `start` is acceptable to the filter without its own
/// entry, `start` is returned unchanged.
pub fn restoration(
    problem: &Problem,
    db: &mut EvalDatabase,
    cfg: &Config,
    filter: &FilterSet,
    start: &EvalRecord,
    models: &SurrogateSet,
    delta_bar: f64,
) -> Result<RestorationOutcome> {
    if let Ok(n) = normal_step(&models.linearize()) {
        if n.norm() <= cfg.compatibility_bound(delta_bar)
            && filter.acceptable_without((start.theta, start.phi), start.theta, start.phi)
        {
            return Ok(RestorationOutcome {
                record: start.clone(),
                delta_bar,
                models: models.clone(),
                n_step: n,
            });
        }
    }

    let first_eval = db.len();
    let spent = |db: &EvalDatabase| db.len() - first_eval;
    let dim = start.x.len();
    let mut current = start.clone();
    let mut step = delta_bar;

    while step > 1e-10 && spent(db) < cfg.restoration_budget {
        let mut improved = false;
        'poll: for i in 0..dim {
            for sign in [1.0, -1.0] {
                if spent(db) >= cfg.restoration_budget {
                    break 'poll;
                }
                let mut y = current.x.clone();
                y[i] += sign * step;
                let rec = evaluate(problem, db, y.as_slice())?;
                if rec.theta < current.theta {
                    current = rec;
                    improved = true;
                    break 'poll;
                }
            }
        }
        if !improved {
            step *= 0.5;
            continue;
        }
        step = (2.0 * step).min(cfg.delta_max);

        if !filter.acceptable(current.theta, current.phi) {
            continue;
        }
        let grown = (cfg.gamma2 * delta_bar).min(cfg.delta_max);
        for radius in [delta_bar, grown] {
            if let Some((models, n_step)) = compatible_at(problem, db, cfg, &current.x, radius)? {
                log::debug!(
                    "restoration reached theta={:e} after {} evaluations",
                    current.theta,
                    spent(db)
                );
                return Ok(RestorationOutcome {
                    record: current,
                    delta_bar: radius,
                    models,
                    n_step,
                });
            }
        }
    }

    Err(Error::RestorationFailed {
        evaluations: spent(db),
        theta: current.theta,
    })
}
