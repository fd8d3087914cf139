//! Hard- and soft-thresholding baselines: proximal gradient applied
//! directly to `f + ρ‖x‖₀` or `f + ρ‖x‖₁`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{proxgrad_solve, CompositeObjective, SpgOptions};
use crate::error::{check_len, Error, Result};
use crate::spo::{
    l0_norm, spo_objective, PenaltyIterate, SolveReport, SolveStatus, SpoProblem,
};

/// Prox of `τ‖·‖₀`: keeps `z_i` when `z_i² ≥ 2τ`.
pub fn hard_threshold_prox(z: &[f64], tau: f64) -> Vec<f64> {
    let cut = 2.0 * tau;
    z.iter().map(|&t| if t * t >= cut { t } else { 0.0 }).collect()
}

/// Prox of `τ‖·‖₁`.
pub fn soft_threshold_prox(z: &[f64], tau: f64) -> Vec<f64> {
    z.iter().map(|&t| soft(t, tau)).collect()
}

fn soft(t: f64, tau: f64) -> f64 {
    t.signum() * (t.abs() - tau).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdKind {
    /// ℓ0 prox.
    Hard,
    /// ℓ1 prox.
    Soft,
}

struct Thresholded<'a> {
    problem: &'a SpoProblem,
    kind: ThresholdKind,
}

impl CompositeObjective for Thresholded<'_> {
    fn dim(&self) -> usize {
        self.problem.dim()
    }

    fn smooth_value(&self, z: &[f64]) -> f64 {
        self.problem.smooth_value(z)
    }

    fn smooth_value_and_gradient(&self, z: &[f64], grad: &mut [f64]) -> f64 {
        self.problem.objective().value_and_gradient(z, grad)
    }

    fn nonsmooth_value(&self, z: &[f64]) -> f64 {
        let x = &z[..self.problem.sparse_dim()];
        let reg = match self.kind {
            ThresholdKind::Hard => l0_norm(x, 0.0) as f64,
            ThresholdKind::Soft => x.iter().map(|t| t.abs()).sum(),
        };
        self.problem.rho() * reg
    }

    fn prox(&self, z: &mut [f64], step: f64) {
        let tau = step * self.problem.rho();
        let n = self.problem.sparse_dim();
        match self.kind {
            ThresholdKind::Hard => {
                let cut = 2.0 * tau;
                z[..n].iter_mut().filter(|t| **t * **t < cut).for_each(|t| *t = 0.0);
            }
            ThresholdKind::Soft => z[..n].iter_mut().for_each(|t| *t = soft(*t, tau)),
        }
        self.problem.projector().project(z);
    }
}

/// Runs the thresholding baseline from `start`. The report carries `y = 0`,
/// `s = |x|`, zero complementarity and `alpha_final = 0`.
pub fn threshold_solve(
    problem: &SpoProblem,
    kind: ThresholdKind,
    start: &[f64],
    opts: &SpgOptions,
    zero_tol: f64,
) -> Result<SolveReport> {
    let clock = Instant::now();
    check_len("start point", problem.dim(), start.len())?;
    if !problem.projector().sparse_block_free() {
        return Err(Error::Unsupported(
            "thresholding baselines need a feasible set that leaves the sparse block free".into(),
        ));
    }
    let obj = Thresholded { problem, kind };
    let mut z0 = start.to_vec();
    problem.projector().project(&mut z0);
    let out = proxgrad_solve(&obj, &z0, opts)?;

    let n = problem.sparse_dim();
    let x = &out.z[..n];
    let iterate = PenaltyIterate {
        s: x.iter().map(|t| t.abs()).collect(),
        y: vec![0.0; n],
        primal: out.z.clone(),
    };
    Ok(SolveReport {
        spo_value: spo_objective(problem, &out.z, zero_tol)?,
        penalty_value: out.value,
        complementarity: 0.0,
        stationarity: out.stationarity,
        inner_iterations: out.iterations,
        outer_iterations: 1,
        wall_time: clock.elapsed().as_secs_f64(),
        alpha_final: 0.0,
        status: SolveStatus::Finished,
        l0: l0_norm(x, zero_tol),
        alpha_trace: Vec::new(),
        final_iterate: iterate,
    })
}
