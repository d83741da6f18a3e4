mod run_config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use mofilter_core::probe::{run_suite, Suite};
use mofilter_core::report::write_outputs;
use mofilter_core::{benchmarks, solve, weighted_sum_baseline, Config, IterationKind, ModelKind, RunResult, Status};

use run_config::{resolve_output_dir, RunConfig};

const EXIT_USAGE: u8 = 1;
const EXIT_MAX_ITER: u8 = 2;
const EXIT_RESTORATION: u8 = 3;
const EXIT_PROBE: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "mofilter", version, about = "Derivative-free trust-region filter solver for constrained multi-objective problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the problem described by a JSON config file.
    Run { config: PathBuf },
    /// Two-parabola problem with the unit disk removed.
    Ex1 {
        #[arg(long, default_value = "rbf-cubic")]
        model: ModelKind,
        #[arg(long, value_enum, default_value = "a")]
        variant: Variant,
    },
    /// MW3 from an infeasible start, plus a weighted-sum comparison run.
    Ex2 {
        /// Loosen the compatibility test (c_delta = 0.99, c_mu = 1000).
        #[arg(long)]
        relaxed: bool,
    },
    /// Run a randomized property suite.
    Probe {
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Variant {
    A,
    B,
}

impl Variant {
    fn x0(self) -> [f64; 2] {
        match self {
            Variant::A => benchmarks::TWO_PARABOLAS_X0_A,
            Variant::B => benchmarks::TWO_PARABOLAS_X0_B,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Variant::A => "a",
            Variant::B => "b",
        }
    }
}

fn status_code(status: Status) -> u8 {
    match status {
        Status::Converged | Status::CritLoopStop => 0,
        Status::MaxIter => EXIT_MAX_ITER,
        Status::RestorationFailed => EXIT_RESTORATION,
        Status::Aborted => EXIT_USAGE,
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.3e}"))
}

fn print_summary(label: &str, res: &RunResult) {
    let rec = &res.record_final;
    println!("[{label}]");
    println!("  status       {:?}", res.status);
    if let Some(msg) = &res.message {
        println!("  message      {msg}");
    }
    println!("  x            {:?}", res.x_final);
    println!("  f            {:?}", rec.f.as_slice());
    println!("  theta        {:.3e}", rec.theta);
    println!("  chi          {}", fmt_opt(res.omega_final.map(|w| w.min(1.0))));
    println!(
        "  kkt          stationarity {}, complementarity {}",
        fmt_opt(res.kkt_stationarity),
        fmt_opt(res.kkt_complementarity)
    );
    println!("  iterations   {} ({} restorations)", res.iterations, res.count(IterationKind::Restoration));
    println!("  evaluations  {}", res.evaluations);
}

fn save(dir: &Path, prefix: &str, problem: &str, res: &RunResult, cfg: &Config) -> anyhow::Result<()> {
    write_outputs(dir, prefix, problem, res, cfg).with_context(|| format!("cannot write outputs to {}", dir.display()))
}

fn cmd_run(path: &Path) -> anyhow::Result<u8> {
    let run = RunConfig::load(path)?;
    let problem = run.problem.build()?;
    let cfg = run.solver_config();
    let res = solve(&problem, &run.x0, &cfg)?;
    let dir = run.output_dir();
    save(&dir, "", problem.name(), &res, &cfg)?;
    print_summary(problem.name(), &res);
    println!("outputs written to {}", dir.display());
    Ok(status_code(res.status))
}

fn cmd_ex1(kind: ModelKind, variant: Variant) -> anyhow::Result<u8> {
    let problem = benchmarks::two_parabolas();
    let cfg = Config::default().with_model(kind);
    let res = solve(&problem, &variant.x0(), &cfg)?;
    let dir = resolve_output_dir(None);
    let label = format!("ex1_{kind}_{}", variant.label());
    save(&dir, &label, problem.name(), &res, &cfg)?;
    println!("x0 = {:?}", variant.x0());
    print_summary(&label, &res);
    Ok(status_code(res.status))
}

fn cmd_ex2(relaxed: bool) -> anyhow::Result<u8> {
    let problem = benchmarks::mw3();
    let cfg = benchmarks::mw3_config(relaxed);
    println!("note: x0 = {:?} is an arbitrary infeasible starting point", benchmarks::MW3_X0);
    if relaxed {
        println!("note: relaxed compatibility values c_delta = 0.99, c_mu = 1000 are arbitrary choices");
    }
    let dir = resolve_output_dir(None);
    let tag = if relaxed { "ex2_relaxed" } else { "ex2" };

    let filter_run = solve(&problem, &benchmarks::MW3_X0, &cfg)?;
    save(&dir, &format!("{tag}_filter"), problem.name(), &filter_run, &cfg)?;
    print_summary(&format!("{tag} filter"), &filter_run);

    let baseline = weighted_sum_baseline(&problem, &[0.5, 0.5], &benchmarks::MW3_X0, &cfg)?;
    save(&dir, &format!("{tag}_weighted_sum"), "mw3_weighted", &baseline, &cfg)?;
    let mut label = format!("{tag} weighted sum 0.5 f1 + 0.5 f2");
    label.push_str(&format!(", objectives {:?}", problem.eval_objectives(&baseline.x_final)));
    print_summary(&label, &baseline);

    Ok(status_code(filter_run.status).max(status_code(baseline.status)))
}

fn cmd_probe(suite: Suite, seed: u64) -> u8 {
    let checks = run_suite(suite, seed);
    for check in &checks {
        println!("{check}");
    }
    if checks.iter().all(|c| c.passed) {
        0
    } else {
        EXIT_PROBE
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Run { config } => cmd_run(&config),
        Command::Ex1 { model, variant } => cmd_ex1(model, variant),
        Command::Ex2 { relaxed } => cmd_ex2(relaxed),
        Command::Probe { suite, seed } => Ok(cmd_probe(suite, seed)),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
