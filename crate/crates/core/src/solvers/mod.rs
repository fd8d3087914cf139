//! Inner solvers (spectral projected gradient, nonmonotone proximal
//! gradient), the outer exact-penalty loop and thresholding baselines.

mod outer;
mod protocol;
mod proxgrad;
mod spg;
mod subproblem;
mod threshold;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use outer::{
    exact_penalty_solve, exact_penalty_solve_observed, ComplementarityMeasure, InnerSolver,
    OuterOptions,
};
pub use protocol::Protocol;
pub use proxgrad::{proxgrad_solve, CompositeObjective};
pub use spg::{replay_spg_trace, spectral_step, spg_solve, SpgObjective, SpgStep, SpgTrace};
pub use subproblem::{PenaltyComposite, PenaltyEpigraph};
pub use threshold::{
    hard_threshold_prox, soft_threshold_prox, threshold_solve, ThresholdKind,
};

/// Smallest line-search step or prox step before giving up.
pub const MIN_STEP: f64 = 1e-16;

/// Options shared by the spectral projected gradient and the proximal
/// gradient inner solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpgOptions {
    /// Armijo parameter; also the sufficient-decrease constant of the
    /// proximal gradient acceptance test.
    pub beta: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// Nonmonotone window length.
    pub memory: usize,
    pub max_iter: usize,
    pub stat_tol: f64,
    pub no_progress_window: usize,
    /// Step reduction factor in `[0.1, 0.5]`.
    pub backtrack: f64,
    /// Keep every iterate and line-search record for replay.
    pub record_trace: bool,
}

impl Default for SpgOptions {
    fn default() -> Self {
        Self {
            beta: 1e-4,
            sigma_min: 1e-10,
            sigma_max: 1e10,
            memory: 10,
            max_iter: 1000,
            stat_tol: 1e-4,
            no_progress_window: 10,
            backtrack: 0.5,
            record_trace: false,
        }
    }
}

impl SpgOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, value: f64, reason| {
            Err(Error::InvalidParameter {
                name,
                value,
                reason,
            })
        };
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad("beta", self.beta, "must lie in (0, 1)");
        }
        if !(self.sigma_min > 0.0 && self.sigma_min < self.sigma_max) {
            return bad("sigma_min", self.sigma_min, "need 0 < sigma_min < sigma_max");
        }
        if self.memory == 0 {
            return bad("memory", 0.0, "must be at least 1");
        }
        if !(self.stat_tol > 0.0) {
            return bad("stat_tol", self.stat_tol, "must be positive");
        }
        if !(0.1..=0.5).contains(&self.backtrack) {
            return bad("backtrack", self.backtrack, "must lie in [0.1, 0.5]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerStatus {
    /// Stationarity residual fell below `stat_tol`.
    Converged,
    MaxIterations,
    /// The nonmonotone reference value did not decrease over
    /// `no_progress_window` iterations.
    NoProgress,
}

/// Result of one inner solve.
#[derive(Debug, Clone)]
pub struct InnerOutcome {
    pub z: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// Stationarity residual at `z`.
    pub stationarity: f64,
    pub status: InnerStatus,
    /// Objective value of every iterate, starting with the initial point.
    pub values: Vec<f64>,
    pub trace: Option<SpgTrace>,
}

pub(crate) fn inf_norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// True when the nonmonotone reference `max(last memory values)` has not
/// decreased over the last `window` iterations.
pub(crate) fn stalled(values: &[f64], memory: usize, window: usize) -> bool {
    let k = values.len() - 1;
    if k < window {
        return false;
    }
    let reference = |end: usize| {
        values[(end + 1).saturating_sub(memory)..=end]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    };
    reference(k) >= reference(k - window)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_options_are_valid() {
        SpgOptions::default().validate().unwrap();
    }

    #[test]
    fn invalid_options_rejected() {
        let mut o = SpgOptions::default();
        o.beta = 1.0;
        assert!(o.validate().is_err());
        let mut o = SpgOptions::default();
        o.sigma_min = 1e12;
        assert!(o.validate().is_err());
        let mut o = SpgOptions::default();
        o.memory = 0;
        assert!(o.validate().is_err());
        let mut o = SpgOptions::default();
        o.backtrack = 0.9;
        assert!(o.validate().is_err());
    }

    #[test]
    fn partial_json_overrides_defaults() {
        let o: SpgOptions = serde_json::from_str(r#"{"max_iter": 5}"#).unwrap();
        assert_eq!(o.max_iter, 5);
        assert_eq!(o.memory, 10);
        assert!(serde_json::from_str::<SpgOptions>(r#"{"maxiter": 5}"#).is_err());
    }

    #[test]
    fn stall_is_measured_on_reference_value() {
        // Oscillating values whose running max over 3 keeps falling.
        let v = [10.0, 9.0, 9.5, 8.0, 8.5, 7.0, 7.5, 6.0];
        assert!(!stalled(&v, 3, 2));
        assert!(!stalled(&v[..2], 3, 2));
        let flat = [5.0, 4.0, 5.0, 4.0, 5.0, 4.0];
        assert!(stalled(&flat, 3, 2));
        assert!(!stalled(&flat, 1, 1));
    }
}
