//! Sparse problems `min f(v) + ρ‖x‖₀ s.t. v ∈ X` and their penalized form.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, check_positive, Error, Result};
use crate::geometry::Projector;
use crate::penalty::PenaltyFamily;

/// Default threshold below which an entry counts as zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-8;

/// Smooth part `f` of the objective.
pub trait SmoothObjective: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn value(&self, v: &[f64]) -> f64;
    fn gradient(&self, v: &[f64], grad: &mut [f64]);

    /// Value and gradient in one pass; override when they share work.
    fn value_and_gradient(&self, v: &[f64], grad: &mut [f64]) -> f64 {
        self.gradient(v, grad);
        self.value(v)
    }
}

/// A smooth objective given by closures, handy for small experiments.
pub struct FnObjective<F, G> {
    dim: usize,
    value: F,
    gradient: G,
}

impl<F, G> FnObjective<F, G>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    pub fn new(dim: usize, value: F, gradient: G) -> Self {
        Self {
            dim,
            value,
            gradient,
        }
    }
}

impl<F, G> fmt::Debug for FnObjective<F, G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnObjective").field("dim", &self.dim).finish()
    }
}

impl<F, G> SmoothObjective for FnObjective<F, G>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, v: &[f64]) -> f64 {
        (self.value)(v)
    }
    fn gradient(&self, v: &[f64], grad: &mut [f64]) {
        (self.gradient)(v, grad)
    }
}

/// `min f(v) + ρ‖x‖₀` over a projectable feasible set, where `x` is the
/// leading `sparse_dim` block of `v`.
#[derive(Debug, Clone)]
pub struct SpoProblem {
    rho: f64,
    objective: Arc<dyn SmoothObjective>,
    feasible: Arc<dyn Projector>,
}

impl SpoProblem {
    pub fn new(
        rho: f64,
        objective: Arc<dyn SmoothObjective>,
        feasible: Arc<dyn Projector>,
    ) -> Result<Self> {
        check_positive("rho", rho)?;
        check_len("projector dimension", objective.dim(), feasible.dim())?;
        if feasible.sparse_dim() > feasible.dim() {
            return Err(Error::DimensionMismatch {
                what: "sparse block larger than primal vector",
                expected: feasible.dim(),
                got: feasible.sparse_dim(),
            });
        }
        Ok(Self {
            rho,
            objective,
            feasible,
        })
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn sparse_dim(&self) -> usize {
        self.feasible.sparse_dim()
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn objective(&self) -> &dyn SmoothObjective {
        self.objective.as_ref()
    }

    pub fn projector(&self) -> &dyn Projector {
        self.feasible.as_ref()
    }

    pub fn smooth_value(&self, v: &[f64]) -> f64 {
        self.objective.value(v)
    }

    pub fn smooth_gradient(&self, v: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; v.len()];
        self.objective.gradient(v, &mut g);
        g
    }

    pub(crate) fn check_primal(&self, v: &[f64]) -> Result<()> {
        check_len("primal vector", self.dim(), v.len())
    }
}

/// `#{i : |x_i| > zero_tol}`.
pub fn l0_norm(x: &[f64], zero_tol: f64) -> usize {
    x.iter().filter(|t| t.abs() > zero_tol).count()
}

/// `f(v) + ρ‖x‖₀`.
pub fn spo_objective(problem: &SpoProblem, v: &[f64], zero_tol: f64) -> Result<f64> {
    problem.check_primal(v)?;
    let x = &v[..problem.sparse_dim()];
    Ok(problem.smooth_value(v) + problem.rho() * l0_norm(x, zero_tol) as f64)
}

/// Iterate of the penalized problem: primal vector `v = (x, w)`, the
/// epigraph auxiliary `s ≈ |x|` and the complementarity partner `y ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyIterate {
    pub primal: Vec<f64>,
    pub s: Vec<f64>,
    pub y: Vec<f64>,
}

impl PenaltyIterate {
    /// Iterate at `v` with `s = |x|` and `y` from [`y_star_from_x`].
    pub fn from_primal(
        primal: Vec<f64>,
        sparse_dim: usize,
        family: &PenaltyFamily,
        zero_tol: f64,
    ) -> Self {
        let x = &primal[..sparse_dim];
        let s = x.iter().map(|t| t.abs()).collect();
        let y = y_star_from_x(x, family, zero_tol);
        Self { primal, s, y }
    }

    pub fn sparse_dim(&self) -> usize {
        self.y.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.primal[..self.sparse_dim()]
    }

    pub fn extra(&self) -> &[f64] {
        &self.primal[self.sparse_dim()..]
    }
}

/// `f(v) + p(y) + α Σ |x_i| y_i`.
pub fn penalty_objective(
    problem: &SpoProblem,
    family: &PenaltyFamily,
    it: &PenaltyIterate,
    alpha: f64,
) -> Result<f64> {
    problem.check_primal(&it.primal)?;
    check_len("auxiliary y", problem.sparse_dim(), it.y.len())?;
    if let Some((index, &value)) = it.y.iter().enumerate().find(|(_, &t)| t < 0.0) {
        return Err(Error::NegativeAuxiliary { index, value });
    }
    let coupling: f64 = it.x().iter().zip(&it.y).map(|(x, y)| x.abs() * y).sum();
    Ok(problem.smooth_value(&it.primal) + family.total_value(&it.y) + alpha * coupling)
}

/// `y_i = s^ρ` on the zero set of `x`, zero elsewhere.
pub fn y_star_from_x(x: &[f64], family: &PenaltyFamily, zero_tol: f64) -> Vec<f64> {
    let s = family.minimizer();
    x.iter()
        .map(|t| if t.abs() <= zero_tol { s } else { 0.0 })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    /// Outer loop ran out of iterations with complementarity above tolerance.
    MaxOuterReached,
    /// A non-penalty solve (thresholding baseline) stopped normally.
    Finished,
}

/// Summary of one inner solve inside the outer penalty loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterRecord {
    pub alpha: f64,
    pub complementarity: f64,
    pub complementarity_sum: f64,
    pub inner_iterations: usize,
    pub stationarity: f64,
    pub inner_status: crate::solvers::InnerStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub final_iterate: PenaltyIterate,
    /// `f(x) + ρ‖x‖₀` at the final primal point.
    pub spo_value: f64,
    pub penalty_value: f64,
    /// `max_i |x_i| y_i`.
    pub complementarity: f64,
    pub stationarity: f64,
    pub inner_iterations: usize,
    pub outer_iterations: usize,
    /// Seconds.
    pub wall_time: f64,
    pub alpha_final: f64,
    pub status: SolveStatus,
    pub l0: usize,
    pub alpha_trace: Vec<OuterRecord>,
}
