use thiserror::Error;

/// Errors raised by the solver and its building blocks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An evaluator returned NaN or an infinity.
    #[error("non-finite value returned by `{function}` at x = {point:?}")]
    NonFiniteValue {
        function: &'static str,
        point: Vec<f64>,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The RBF interpolation system is numerically singular.
    #[error("singular interpolation system ({points} points)")]
    SingularInterpolation { points: usize },

    /// The linearized feasible set is empty.
    #[error("linearized constraints are infeasible")]
    Infeasible,

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("step direction has zero length")]
    ZeroDirection,

    #[error("model decrease {0:e} is too small to form a ratio")]
    ZeroModelDecrease(f64),

    /// Feasible points must never enter the filter.
    #[error("attempted to add a feasible pair (theta = 0, phi = {phi}) to the filter")]
    FeasiblePointRejected { phi: f64 },

    #[error("restoration failed after {evaluations} evaluations (theta = {theta:e})")]
    RestorationFailed { evaluations: usize, theta: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
