use thiserror::Error;

/// Errors raised by scheme construction, stepping and analysis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate quadrature weights: b[{index}] = 0")]
    DegenerateWeights { index: usize },

    #[error("stage iteration did not converge after {iterations} iterations (last residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("non-finite value in force evaluation")]
    NumericalFailure,

    #[error("linear stage system is singular")]
    SingularStageSystem,

    #[error("stage matrix is singular at mu = {mu}")]
    SingularAtMu { mu: f64 },

    #[error("method is not stable at mu = {mu} (half trace {half_trace})")]
    NotStableAtMu { mu: f64, half_trace: f64 },

    #[error("step {step} failed: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("reference solver did not reach tolerance {tol:e} within {steps} steps (last difference {last_difference:e})")]
    OracleFailure {
        tol: f64,
        steps: usize,
        last_difference: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Step index for errors raised inside a multi-step integration.
    pub fn step_index(&self) -> Option<usize> {
        match self {
            Error::StepFailed { step, .. } => Some(*step),
            _ => None,
        }
    }
}
