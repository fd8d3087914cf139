use thiserror::Error;

/// Errors raised by problem construction, projections and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("negative auxiliary entry y[{index}] = {value}")]
    NegativeAuxiliary { index: usize, value: f64 },

    #[error("point is infeasible (residual {residual:e} > {tolerance:e})")]
    Infeasible { residual: f64, tolerance: f64 },

    #[error("empty restricted feasible set: {0}")]
    EmptyRestriction(String),

    #[error("line search failed at iteration {iteration}: step fell below {min_step:e}")]
    LineSearchFailed { iteration: usize, min_step: f64 },

    #[error("proximal step size underflow at iteration {iteration}")]
    StepUnderflow { iteration: usize },

    #[error("{0}")]
    Unsupported(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("oracle limit exceeded: n = {n} > {max}")]
    OracleTooLarge { n: usize, max: usize },

    #[error("bisection bracket invalid: t({lower}) = {t_lower}, t({upper}) = {t_upper}")]
    BracketFailure {
        lower: f64,
        upper: f64,
        t_lower: f64,
        t_upper: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { what, expected, got })
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive and finite",
        })
    }
}
