//! Solver parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::surrogate::ModelKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub delta0: f64,
    pub delta_max: f64,
    pub gamma0: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub nu0: f64,
    pub nu1: f64,
    pub eps_chi: f64,
    pub eps_theta: f64,
    pub kappa_theta: f64,
    pub psi: f64,
    pub b_crit: f64,
    pub m_crit: f64,
    pub alpha_crit: f64,
    pub c_delta: f64,
    pub c_mu: f64,
    pub mu: f64,
    pub gamma_theta: f64,
    pub a_armijo: f64,
    pub b_armijo: f64,
    pub backtrack_max: usize,
    pub max_iter: usize,
    pub tol_rel_x: f64,
    pub tol_rel_f: f64,
    pub model_kind: ModelKind,
    /// New evaluations allowed per restoration phase.
    pub restoration_budget: usize,
    /// Sub-iteration cap of the criticality routine.
    pub crit_max_iter: usize,
    /// Stop as soon as the criticality routine has run once.
    pub stop_on_crit_loop: bool,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            delta0: 0.5,
            delta_max: 16.0,
            gamma0: 0.1,
            gamma1: 0.5,
            gamma2: 2.0,
            nu0: 0.9,
            nu1: 0.01,
            eps_chi: 0.1,
            eps_theta: 0.1,
            kappa_theta: 1e-4,
            psi: 2.0,
            b_crit: 1000.0,
            m_crit: 3000.0,
            alpha_crit: 0.5,
            c_delta: 0.7,
            c_mu: 100.0,
            mu: 0.01,
            gamma_theta: 1e-4,
            a_armijo: 1e-4,
            b_armijo: 0.5,
            backtrack_max: 50,
            max_iter: 100,
            tol_rel_x: 1e-5,
            tol_rel_f: 1e-5,
            model_kind: ModelKind::RbfCubic,
            restoration_budget: 1000,
            crit_max_iter: 60,
            stop_on_crit_loop: true,
        }
    }
}

fn check(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("violated invariant: {what}")))
    }
}

impl Config {
    pub fn with_model(mut self, kind: ModelKind) -> Self {
        self.model_kind = kind;
        self
    }

    /// Checks all parameter invariants; the error names the first violated one.
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.delta0,
            self.delta_max,
            self.gamma0,
            self.gamma1,
            self.gamma2,
            self.nu0,
            self.nu1,
            self.eps_chi,
            self.eps_theta,
            self.kappa_theta,
            self.psi,
            self.b_crit,
            self.m_crit,
            self.alpha_crit,
            self.c_delta,
            self.c_mu,
            self.mu,
            self.gamma_theta,
            self.a_armijo,
            self.b_armijo,
            self.tol_rel_x,
            self.tol_rel_f,
        ];
        check(finite.iter().all(|v| v.is_finite()), "all parameters finite")?;
        check(
            0.0 < self.delta0 && self.delta0 <= self.delta_max,
            "0 < delta0 <= delta_max",
        )?;
        check(
            0.0 < self.gamma0 && self.gamma0 <= self.gamma1 && self.gamma1 < 1.0 && 1.0 <= self.gamma2,
            "0 < gamma0 <= gamma1 < 1 <= gamma2",
        )?;
        check(
            0.0 < self.nu1 && self.nu1 <= self.nu0 && self.nu0 < 1.0,
            "0 < nu1 <= nu0 < 1",
        )?;
        check(0.0 < self.eps_chi && self.eps_chi < 1.0, "0 < eps_chi < 1")?;
        check(0.0 <= self.eps_theta, "0 <= eps_theta")?;
        check(
            0.0 < self.kappa_theta && self.kappa_theta < 1.0,
            "0 < kappa_theta < 1",
        )?;
        check(0.0 < self.mu && self.mu < 1.0, "0 < mu < 1")?;
        check(self.psi > 1.0 / (1.0 + self.mu), "psi > 1/(1+mu)")?;
        check(
            0.0 < self.b_crit && self.b_crit < self.m_crit,
            "0 < b_crit < m_crit",
        )?;
        check(
            0.0 < self.alpha_crit && self.alpha_crit < 1.0,
            "0 < alpha_crit < 1",
        )?;
        check(
            0.0 < self.c_delta && self.c_delta <= 1.0,
            "0 < c_delta <= 1",
        )?;
        check(0.0 < self.c_mu, "0 < c_mu")?;
        check(
            0.0 < self.gamma_theta && self.gamma_theta < 1.0,
            "0 < gamma_theta < 1",
        )?;
        check(
            0.0 < self.a_armijo && self.a_armijo < 1.0,
            "0 < a_armijo < 1",
        )?;
        check(
            0.0 < self.b_armijo && self.b_armijo < 1.0,
            "0 < b_armijo < 1",
        )?;
        check(
            self.tol_rel_x >= 0.0 && self.tol_rel_f >= 0.0,
            "tol_rel_x, tol_rel_f >= 0",
        )?;
        Ok(())
    }

    pub fn compatibility_bound(&self, delta_bar: f64) -> f64 {
        crate::subproblem::compatibility_bound(delta_bar, self.c_delta, self.c_mu, self.mu)
    }
}
