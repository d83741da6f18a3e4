//! Derivative-free trust-region filter method for constrained
//! multi-objective optimization.
//!
//! Objectives and constraints are treated as black boxes and replaced by
//! cubic RBF or finite-difference Taylor surrogates inside a trust region.
//! Each iteration combines a normal step towards feasibility with a
//! tangential step that decreases all objective models, and a filter on
//! `(constraint violation, max objective)` pairs decides acceptance.
//!
//! ```
//! use mofilter_core::{benchmarks, solve, Config, Status};
//!
//! let res = solve(&benchmarks::two_parabolas(), &[-2.0, 0.5], &Config::default()).unwrap();
//! assert_eq!(res.status, Status::Converged);
//! assert_eq!(res.record_final.theta, 0.0);
//! ```

pub mod benchmarks;
pub mod config;
pub mod driver;
pub mod error;
pub mod filter;
pub mod probe;
pub mod problem;
pub mod report;
pub mod subproblem;
pub mod surrogate;

pub use config::Config;
pub use driver::{solve, solve_with_db, weighted_sum_baseline, IterationKind, IterationLog, RunResult, Status};
pub use error::{Error, Result};
pub use filter::FilterSet;
pub use problem::{evaluate, EvalDatabase, EvalRecord, Problem};
pub use surrogate::{ModelKind, SurrogateSet};
