//! Built-in test problems.

use std::f64::consts::PI;

use crate::config::Config;
use crate::problem::Problem;

/// Two parabolas with the unit disk removed from the feasible set.
///
/// `f1 = (x1-2)^2 + (x2-1)^2`, `f2 = (x1-2)^2 + (x2+1)^2`,
/// `g = 1 - x1^2 - x2^2 <= 0`.
pub fn two_parabolas() -> Problem {
    Problem::new("two_parabolas", 2, 2, |x| {
        let a = (x[0] - 2.0).powi(2);
        vec![a + (x[1] - 1.0).powi(2), a + (x[1] + 1.0).powi(2)]
    })
    .with_inequalities(1, |x| vec![1.0 - x[0] * x[0] - x[1] * x[1]])
}

/// Distance-like helper `d(x)` of the MW3 problem.
pub fn mw3_d(x: &[f64]) -> f64 {
    1.0 + 2.0 * (x[1] + (x[0] - 0.5).powi(2) - 1.0).powi(2)
        + 2.0 * (x[2] + (x[1] - 0.5).powi(2) - 1.0).powi(2)
}

fn mw3_objectives(x: &[f64]) -> [f64; 2] {
    let f1 = x[0];
    let d = mw3_d(x);
    [f1, d * (1.0 - f1 / d)]
}

/// The two nonlinear MW3 constraints `[c1, c2]`.
pub fn mw3_constraints(x: &[f64]) -> [f64; 2] {
    let [f1, f2] = mw3_objectives(x);
    let l = 2f64.sqrt() * (f2 - f1);
    let s = (0.75 * PI * l).sin();
    let c1 = f1 + f2 - 1.05 - 0.45 * s.powi(6);
    let c2 = -f1 - f2 + 0.85 + 0.3 * s.powi(2);
    [c1, c2]
}

/// The three-variable, bi-objective MW3 problem.
///
/// Inequalities are ordered `[c1, c2, -x1, -x2, -x3, x1-1, x2-1, x3-1]`: the
/// unit box is encoded as six ordinary constraints.
pub fn mw3() -> Problem {
    Problem::new("mw3", 3, 2, |x| mw3_objectives(x).to_vec()).with_inequalities(8, |x| {
        let [c1, c2] = mw3_constraints(x);
        let mut g = Vec::with_capacity(8);
        g.push(c1);
        g.push(c2);
        g.extend(x.iter().map(|v| -v));
        g.extend(x.iter().map(|v| v - 1.0));
        g
    })
}

/// Looks up a built-in problem by name.
pub fn by_name(name: &str) -> Option<Problem> {
    match name {
        "two_parabolas" => Some(two_parabolas()),
        "mw3" => Some(mw3()),
        _ => None,
    }
}

pub const NAMES: [&str; 2] = ["two_parabolas", "mw3"];

/// Starting points of the two `two_parabolas` demo runs.
pub const TWO_PARABOLAS_X0_A: [f64; 2] = [-2.0, 0.5];
pub const TWO_PARABOLAS_X0_B: [f64; 2] = [-2.0, 0.0];

/// Infeasible starting point of the MW3 demo run.
pub const MW3_X0: [f64; 3] = [0.5, 0.5, 0.5];

/// Settings of the MW3 demo: defaults with 500 iterations and `1e-6`
/// relative tolerances; `relaxed` loosens the compatibility test to
/// `c_delta = 0.99`, `c_mu = 1000`.
pub fn mw3_config(relaxed: bool) -> Config {
    let mut cfg = Config {
        max_iter: 500,
        tol_rel_x: 1e-6,
        tol_rel_f: 1e-6,
        ..Config::default()
    };
    if relaxed {
        cfg.c_delta = 0.99;
        cfg.c_mu = 1000.0;
    }
    cfg
}

/// Distance from `x` to the Pareto-critical set of `two_parabolas`: the
/// segment `{2} x [-1, 1]` together with the arc of the unit circle with
/// angles in `[pi - atan(1/2), pi + atan(1/2)]`.
pub fn two_parabolas_critical_distance(x: &[f64]) -> f64 {
    let seg = (x[0] - 2.0).hypot(x[1] - x[1].clamp(-1.0, 1.0));
    let r = x[0].hypot(x[1]);
    let half = 0.5f64.atan();
    // angle measured from the negative x1-axis
    let t = (-x[1]).atan2(-x[0]);
    let arc = if t.abs() <= half {
        (r - 1.0).abs()
    } else {
        let end = |s: f64| {
            let a = PI + s * half;
            (x[0] - a.cos()).hypot(x[1] - a.sin())
        };
        end(1.0).min(end(-1.0))
    };
    seg.min(arc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_parabolas_shape() {
        let p = two_parabolas();
        assert_eq!((p.dim(), p.num_obj(), p.num_eq(), p.num_ineq()), (2, 2, 0, 1));
        assert_eq!(p.eval_inequalities(&[1.0, 0.0]), vec![0.0]);
        // inside the disk is infeasible, outside is feasible
        assert!(p.eval_inequalities(&[0.5, 0.5])[0] > 0.0);
        assert!(p.eval_inequalities(&[1.5, 0.0])[0] < 0.0);
    }

    #[test]
    fn two_parabolas_segment_is_critical() {
        // on {2} x [-1, 1] the gradients are (0, 2(s-1)) and (0, 2(s+1)),
        // which point in opposite directions
        let p = two_parabolas();
        for s in [-1.0, -0.3, 0.0, 0.8, 1.0] {
            let f = p.eval_objectives(&[2.0, s]);
            assert_eq!(f[0], (s - 1.0) * (s - 1.0));
            assert_eq!(f[1], (s + 1.0) * (s + 1.0));
        }
    }

    #[test]
    fn mw3_shape_and_objectives() {
        let p = mw3();
        assert_eq!((p.dim(), p.num_obj(), p.num_eq(), p.num_ineq()), (3, 2, 0, 8));
        for x in [[0.1, 0.2, 0.3], [0.9, 0.0, 1.0], [0.5, 0.5, 0.5]] {
            let f = p.eval_objectives(&x);
            assert_eq!(f[0], x[0]);
            assert!((f[1] - (mw3_d(&x) - x[0])).abs() < 1e-15);
        }
    }

    #[test]
    fn mw3_d_values() {
        // both squared terms vanish
        assert_eq!(mw3_d(&[0.5, 1.0, 0.75]), 1.0);
        // second term is 2 * 0.25^2
        assert_eq!(mw3_d(&[0.5, 1.0, 1.0]), 1.125);
    }

    #[test]
    fn mw3_constraint_sum_identity() {
        for x in [[0.1, 0.2, 0.3], [0.7, 0.4, 0.9], [0.5, 0.5, 0.5]] {
            let [f1, f2] = mw3_objectives(&x);
            let s = (0.75 * PI * 2f64.sqrt() * (f2 - f1)).sin();
            let [c1, c2] = mw3_constraints(&x);
            let expected = -0.2 - 0.45 * s.powi(6) + 0.3 * s.powi(2);
            assert!((c1 + c2 - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn mw3_box_encoding() {
        let g = mw3().eval_inequalities(&[0.2, 1.3, -0.1]);
        assert_eq!(&g[2..5], &[-0.2, -1.3, 0.1]);
        assert!((g[5] + 0.8).abs() < 1e-15);
        assert!((g[6] - 0.3).abs() < 1e-15);
        assert!((g[7] + 1.1).abs() < 1e-15);
    }

    #[test]
    fn critical_distance() {
        assert_eq!(two_parabolas_critical_distance(&[2.0, 0.3]), 0.0);
        assert!((two_parabolas_critical_distance(&[2.5, 2.0]) - 0.5f64.hypot(1.0)).abs() < 1e-15);
        assert!(two_parabolas_critical_distance(&[-1.0, 0.0]) < 1e-15);
        assert!((two_parabolas_critical_distance(&[-2.0, 0.0]) - 1.0).abs() < 1e-15);
        // beyond the arc end the nearest point is the end point
        let end = [(PI + 0.5f64.atan()).cos(), (PI + 0.5f64.atan()).sin()];
        assert!(two_parabolas_critical_distance(&[0.0, -1.0]) <= (end[0].hypot(end[1] + 1.0)) + 1e-15);
        assert!(two_parabolas_critical_distance(&[0.0, -1.0]) > 0.5);
    }

    #[test]
    fn mw3_demo_settings() {
        let cfg = mw3_config(true);
        assert_eq!((cfg.c_delta, cfg.c_mu, cfg.max_iter), (0.99, 1000.0, 500));
        cfg.validate().unwrap();
        assert!(mw3().eval_inequalities(&MW3_X0)[0] > 0.0);
    }

    #[test]
    fn lookup() {
        for name in NAMES {
            assert_eq!(by_name(name).unwrap().name(), name);
        }
        assert!(by_name("zdt1").is_none());
    }
}
