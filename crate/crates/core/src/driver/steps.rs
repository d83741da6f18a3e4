//! Scalar rules used by the main loop.

use nalgebra::DVector;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::surrogate::SurrogateSet;

/// `(phi_k - phi_trial) / (phi_model_k - phi_model_trial)`.
pub fn ratio_rho(phi_k: f64, phi_trial: f64, phi_model_k: f64, phi_model_trial: f64) -> Result<f64> {
    let denom = phi_model_k - phi_model_trial;
    if denom.abs() < 1e-14 {
        return Err(Error::ZeroModelDecrease(denom));
    }
    Ok((phi_k - phi_trial) / denom)
}

/// `phi_model_k - phi_model_trial >= kappa_theta * theta_k^psi`.
pub fn model_decrease_test(phi_model_k: f64, phi_model_trial: f64, theta_k: f64, cfg: &Config) -> bool {
    phi_model_k - phi_model_trial >= cfg.kappa_theta * theta_k.powf(cfg.psi)
}

pub fn radius_update(delta: f64, rho: f64, cfg: &Config) -> f64 {
    if rho < cfg.nu0 {
        cfg.gamma1 * delta
    } else {
        (cfg.gamma2 * delta).min(cfg.delta_max)
    }
}

/// Armijo decrease `Phi_m(x_n) - Phi_m(x_n + s d) >= a s omega`.
pub fn armijo_holds(models: &SurrogateSet, x_n: &DVector<f64>, d: &DVector<f64>, s: f64, omega: f64, a: f64) -> bool {
    let x_t = x_n + d * s;
    models.scalarized(x_n) - models.scalarized(&x_t) >= a * s * omega
}

/// Backtracking multiplier `s = b^j sigma_bar / ||d||` for the smallest
/// admissible `j`, or `0` when the cap is exhausted. Returns `(s, j)`.
pub fn backtracking_stepsize(
    models: &SurrogateSet,
    x_n: &DVector<f64>,
    d: &DVector<f64>,
    sigma_bar: f64,
    omega: f64,
    cfg: &Config,
) -> (f64, usize) {
    let dn = d.norm();
    if sigma_bar <= 0.0 || dn == 0.0 {
        return (0.0, 0);
    }
    let mut factor = 1.0;
    for j in 0..=cfg.backtrack_max {
        let s = factor * sigma_bar / dn;
        if armijo_holds(models, x_n, d, s, omega, cfg.a_armijo) {
            return (s, j);
        }
        factor *= cfg.b_armijo;
    }
    (0.0, cfg.backtrack_max)
}

/// Relative change test on an accepted step.
pub fn stopping_check(
    x_k: &DVector<f64>,
    x_trial: &DVector<f64>,
    f_k: &DVector<f64>,
    f_trial: &DVector<f64>,
    cfg: &Config,
) -> bool {
    (x_k - x_trial).norm() <= cfg.tol_rel_x * x_k.norm()
        || (f_k - f_trial).norm() <= cfg.tol_rel_f * f_k.norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{EvalDatabase, Problem};
    use crate::surrogate::build_taylor;

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    #[test]
    fn rho_examples() {
        assert_eq!(ratio_rho(1.0, 0.5, 2.0, 1.0).unwrap(), 0.5);
        assert_eq!(ratio_rho(1.0, 1.1, 2.0, 1.0).unwrap(), -0.10000000000000009);
        assert!(matches!(ratio_rho(1.0, 0.0, 1.0, 1.0), Err(Error::ZeroModelDecrease(_))));
    }

    #[test]
    fn model_decrease_examples() {
        let cfg = Config::default();
        assert!(model_decrease_test(1.0, 1.0, 0.0, &cfg));
        assert!(model_decrease_test(1.0, 1.0 - 1e-5, 0.1, &cfg));
        assert!(!model_decrease_test(1.0, 1.0 - 1e-7, 0.1, &cfg));
    }

    #[test]
    fn radius_examples() {
        let cfg = Config::default();
        assert_eq!(radius_update(0.5, 0.95, &cfg), 1.0);
        assert_eq!(radius_update(16.0, 0.95, &cfg), 16.0);
        assert_eq!(radius_update(0.5, 0.1, &cfg), 0.25);
    }

    #[test]
    fn backtracking_examples() {
        let p = Problem::new("sq", 1, 1, |x| vec![x[0] * x[0]]);
        let mut db = EvalDatabase::new();
        let models = build_taylor(&p, &mut db, &dv(&[1.0]), 1.0, 2).unwrap();
        let cfg = Config::default();
        let (s, j) = backtracking_stepsize(&models, &dv(&[1.0]), &dv(&[-1.0]), 1.0, 2.0, &cfg);
        assert_eq!(j, 0);
        assert!((s - 1.0).abs() < 1e-15);
        let (s, _) = backtracking_stepsize(&models, &dv(&[1.0]), &dv(&[-1.0]), 0.0, 2.0, &cfg);
        assert_eq!(s, 0.0);
        // overshooting step gets halved: from 1 along -1 with sigma_bar 4
        let (s, j) = backtracking_stepsize(&models, &dv(&[1.0]), &dv(&[-1.0]), 4.0, 2.0, &cfg);
        assert_eq!((s, j), (1.0, 2));
    }

    #[test]
    fn stopping_examples() {
        let cfg = Config::default();
        let f = dv(&[1.0, 2.0]);
        assert!(stopping_check(&dv(&[1.0, 0.0]), &dv(&[1.0 + 1e-7, 0.0]), &f, &dv(&[0.0, 0.0]), &cfg));
        assert!(!stopping_check(&dv(&[1.0, 0.0]), &dv(&[1.1, 0.0]), &f, &dv(&[0.0, 0.0]), &cfg));
        assert!(stopping_check(&dv(&[1.0, 0.0]), &dv(&[1.1, 0.0]), &f, &f, &cfg));
    }
}
