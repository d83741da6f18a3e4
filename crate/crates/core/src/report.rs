//! Serialization of run results: a JSON summary and CSV traces.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::Config;
use crate::driver::{FilterSnapshot, IterationLog, RunResult, Status};

/// Floats are written with 17 significant digits.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Serialize)]
pub struct ResultSummary<'a> {
    pub problem: &'a str,
    pub status: Status,
    pub message: Option<&'a str>,
    pub x_final: &'a [f64],
    pub f_final: Vec<f64>,
    pub theta_final: f64,
    pub phi_final: f64,
    pub kkt_stationarity: Option<f64>,
    pub kkt_complementarity: Option<f64>,
    pub omega_final: Option<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub config: &'a Config,
}

impl<'a> ResultSummary<'a> {
    pub fn new(problem: &'a str, result: &'a RunResult, config: &'a Config) -> Self {
        Self {
            problem,
            status: result.status,
            message: result.message.as_deref(),
            x_final: &result.x_final,
            f_final: result.record_final.f.iter().copied().collect(),
            theta_final: result.record_final.theta,
            phi_final: result.record_final.phi,
            kkt_stationarity: result.kkt_stationarity,
            kkt_complementarity: result.kkt_complementarity,
            omega_final: result.omega_final,
            iterations: result.iterations,
            evaluations: result.evaluations,
            config,
        }
    }
}

pub fn trace_header(dim: usize) -> Vec<String> {
    let mut cols = vec!["k".to_string(), "kind".to_string()];
    cols.extend((1..=dim).map(|i| format!("x{i}")));
    cols.extend(
        ["theta", "phi", "chi", "delta_bar", "delta", "rho", "n_norm", "sigma", "evals_cumulative"]
            .map(String::from),
    );
    cols
}

pub fn trace_row(row: &IterationLog) -> Vec<String> {
    let mut out = vec![row.k.to_string(), row.kind.as_str().to_string()];
    out.extend(row.x.iter().map(|v| num(*v)));
    out.extend([
        num(row.theta),
        num(row.phi),
        num(row.chi),
        num(row.delta_bar),
        num(row.delta),
        row.rho.map(num).unwrap_or_default(),
        num(row.n_norm),
        num(row.sigma),
        row.evals_cumulative.to_string(),
    ]);
    out
}

pub fn write_trace<W: Write>(out: W, dim: usize, log: &[IterationLog]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(trace_header(dim))?;
    for row in log {
        w.write_record(trace_row(row))?;
    }
    w.flush()?;
    Ok(())
}

/// One row per filter entry after each iteration: `k, theta_j, phi_j`.
pub fn write_filter<W: Write>(out: W, history: &[FilterSnapshot]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "theta_j", "phi_j"])?;
    for snap in history {
        for &(theta, phi) in &snap.entries {
            w.write_record([snap.k.to_string(), num(theta), num(phi)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes `result.json`, `trace.csv` and `filter.csv` into `dir`,
/// prefixing each file name with `prefix` when it is non-empty.
pub fn write_outputs(
    dir: &Path,
    prefix: &str,
    problem: &str,
    result: &RunResult,
    config: &Config,
) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let name = |base: &str| {
        if prefix.is_empty() {
            dir.join(base)
        } else {
            dir.join(format!("{prefix}_{base}"))
        }
    };
    let summary = ResultSummary::new(problem, result, config);
    let json = serde_json::to_string_pretty(&summary).map_err(std::io::Error::other)?;
    fs::write(name("result.json"), json + "\n")?;
    write_trace(fs::File::create(name("trace.csv"))?, result.x_final.len(), &result.log)
        .map_err(std::io::Error::other)?;
    write_filter(fs::File::create(name("filter.csv"))?, &result.filter_history).map_err(std::io::Error::other)?;
    Ok(())
}
