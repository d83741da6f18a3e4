use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use mofilter_core::{benchmarks, Config, ModelKind, Problem};
use serde::Deserialize;

pub const OUTPUT_DIR_VAR: &str = "MOFILTER_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "mofilter-out";

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ProblemSpec {
    Name(String),
    Weighted {
        name: String,
        #[serde(default)]
        weights: Option<Vec<f64>>,
    },
}

impl ProblemSpec {
    pub fn build(&self) -> anyhow::Result<Problem> {
        let (name, weights) = match self {
            ProblemSpec::Name(name) => (name, None),
            ProblemSpec::Weighted { name, weights } => (name, weights.as_ref()),
        };
        let problem = benchmarks::by_name(name).with_context(|| {
            format!("unknown problem `{name}` (available: {})", benchmarks::NAMES.join(", "))
        })?;
        let Some(w) = weights else {
            return Ok(problem);
        };
        if w.len() != problem.num_obj() {
            bail!("problem `{name}` has {} objectives but {} weights were given", problem.num_obj(), w.len());
        }
        if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            bail!("weights must be nonnegative and sum to one");
        }
        Ok(problem.weighted_sum(w))
    }
}

/// Contents of a `run` configuration file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub x0: Vec<f64>,
    #[serde(default)]
    pub model_kind: Option<ModelKind>,
    #[serde(default)]
    pub overrides: Config,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Only used by probe sampling; solves are deterministic.
    #[serde(default)]
    pub seed: u64,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let cfg: RunConfig =
            serde_json::from_str(&text).with_context(|| format!("malformed config {}", path.display()))?;
        cfg.solver_config().validate()?;
        Ok(cfg)
    }

    pub fn solver_config(&self) -> Config {
        let mut cfg = self.overrides.clone();
        if let Some(kind) = self.model_kind {
            cfg.model_kind = kind;
        }
        cfg
    }

    pub fn output_dir(&self) -> PathBuf {
        resolve_output_dir(self.output_dir.clone())
    }
}

/// The environment variable wins over any configured directory.
pub fn resolve_output_dir(configured: Option<PathBuf>) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_VAR) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => configured.unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_and_full_documents() {
        let cfg: RunConfig = serde_json::from_str(r#"{"problem": "two_parabolas", "x0": [-2, 0.5]}"#).unwrap();
        assert_eq!(cfg.problem, ProblemSpec::Name("two_parabolas".into()));
        assert_eq!(cfg.solver_config(), Config::default());

        let cfg: RunConfig = serde_json::from_str(
            r#"{"problem": {"name": "mw3", "weights": [0.5, 0.5]}, "x0": [0.5, 0.5, 0.5],
                "model_kind": "taylor1", "overrides": {"max_iter": 7}, "output_dir": "o", "seed": 3}"#,
        )
        .unwrap();
        let solver = cfg.solver_config();
        assert_eq!((solver.model_kind, solver.max_iter), (ModelKind::Taylor1, 7));
        assert_eq!(cfg.problem.build().unwrap().num_obj(), 1);
    }

    #[test]
    fn rejects_unknown_keys_and_problems() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"problem": "mw3", "x0": [0], "colour": 1}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"x0": [0]}"#).is_err());
        let cfg: RunConfig = serde_json::from_str(r#"{"problem": "zdt1", "x0": [0]}"#).unwrap();
        assert!(cfg.problem.build().is_err());
    }

    #[test]
    fn rejects_bad_weights() {
        let spec = ProblemSpec::Weighted {
            name: "mw3".into(),
            weights: Some(vec![1.5, -0.5]),
        };
        assert!(spec.build().is_err());
    }
}
