//! Residuals, stationarity certificates and the support-enumeration oracle.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::penalty::PenaltyFamily;
use crate::problems::PortfolioInstance;
use crate::solvers::{PenaltyEpigraph, SpgObjective};
use crate::spo::{PenaltyIterate, SpoProblem};

/// Largest dimension accepted by [`spo_bruteforce`].
pub const ORACLE_MAX_DIM: usize = 16;

/// Feasibility tolerance for residual checks.
pub const FEASIBILITY_TOL: f64 = 1e-6;

/// `max_i |x_i| y_i`.
pub fn complementarity(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| a.abs() * b)
        .fold(0.0, f64::max)
}

/// `Σ_i |x_i| y_i`, the Frobenius form used for matrix-valued codes.
pub fn complementarity_sum(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a.abs() * b).sum()
}

fn check_feasible(problem: &SpoProblem, v: &[f64]) -> Result<()> {
    let residual = problem.projector().residual(v);
    if residual > FEASIBILITY_TOL || !residual.is_finite() {
        return Err(Error::Infeasible {
            residual,
            tolerance: FEASIBILITY_TOL,
        });
    }
    Ok(())
}

/// Projected-gradient residual of `min f` over the feasible set with the
/// zero set of `x` frozen at zero. Zero certifies M-stationarity.
pub fn tnlp_stationarity(problem: &SpoProblem, v: &[f64], zero_tol: f64) -> Result<f64> {
    check_len("primal vector", problem.dim(), v.len())?;
    check_feasible(problem, v)?;
    let support: Vec<bool> = v[..problem.sparse_dim()]
        .iter()
        .map(|t| t.abs() > zero_tol)
        .collect();
    let g = problem.smooth_gradient(v);
    let mut target: Vec<f64> = v.iter().zip(&g).map(|(a, b)| a - b).collect();
    problem.projector().project_restricted(&mut target, &support)?;
    Ok(target
        .iter()
        .zip(v)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityCertificate {
    pub comp_residual: f64,
    /// Projected-gradient residual of the penalized problem at `(x, |x|, y)`.
    pub pg_residual: f64,
    pub tnlp_residual: f64,
    /// `max |p'(y_i) + α|x_i||` over entries with `y_i > zero_tol`.
    pub y_block_residual: f64,
    /// Indices `i` with `|x_i| ≤ zero_tol`.
    pub zero_set: Vec<usize>,
}

impl StationarityCertificate {
    pub fn passes(&self, comp_tol: f64, stat_tol: f64) -> bool {
        self.comp_residual <= comp_tol
            && self.pg_residual <= stat_tol
            && self.tnlp_residual <= stat_tol
            && self.y_block_residual <= stat_tol
    }
}

pub fn certificate(
    problem: &SpoProblem,
    family: &PenaltyFamily,
    it: &PenaltyIterate,
    alpha: f64,
    zero_tol: f64,
) -> Result<StationarityCertificate> {
    check_len("primal vector", problem.dim(), it.primal.len())?;
    check_len("auxiliary y", problem.sparse_dim(), it.y.len())?;
    check_feasible(problem, &it.primal)?;
    if let Some((index, &value)) = it.y.iter().enumerate().find(|(_, &t)| t < 0.0) {
        return Err(Error::NegativeAuxiliary { index, value });
    }
    let x = it.x();
    let exact = PenaltyIterate {
        primal: it.primal.clone(),
        s: x.iter().map(|t| t.abs()).collect(),
        y: it.y.clone(),
    };
    let epi = PenaltyEpigraph::new(problem, family, alpha);
    let z = epi.pack(&exact);
    let mut g = vec![0.0; z.len()];
    epi.value_and_gradient(&z, &mut g);
    let mut target: Vec<f64> = z.iter().zip(&g).map(|(a, b)| a - b).collect();
    epi.project(&mut target);
    let pg_residual = target
        .iter()
        .zip(&z)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let y_block_residual = x
        .iter()
        .zip(&it.y)
        .filter(|(_, &y)| y > zero_tol)
        .map(|(xi, &yi)| (family.derivative(yi) + alpha * xi.abs()).abs())
        .fold(0.0, f64::max);

    Ok(StationarityCertificate {
        comp_residual: complementarity(x, &it.y),
        pg_residual,
        tnlp_residual: tnlp_stationarity(problem, &it.primal, zero_tol)?,
        y_block_residual,
        zero_set: x
            .iter()
            .enumerate()
            .filter(|(_, t)| t.abs() <= zero_tol)
            .map(|(i, _)| i)
            .collect(),
    })
}

/// Global minimizer of a portfolio problem found by trying every support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSolution {
    pub x: Vec<f64>,
    /// `½xᵀQx − βμᵀx + ρ‖x‖₀`.
    pub value: f64,
    /// Sorted indices of the support.
    pub support: Vec<usize>,
    /// Supports whose KKT system was singular.
    pub skipped: usize,
}

/// Solves `min ½xᵀQx − βμᵀx s.t. eᵀx = 1, x_i = 0 (i ∉ S)` through its KKT
/// system. Returns the full-length minimizer and its smooth value.
pub fn solve_on_support(inst: &PortfolioInstance, support: &[usize]) -> Option<(Vec<f64>, f64)> {
    let k = support.len();
    let mut kkt = DMatrix::zeros(k + 1, k + 1);
    let mut rhs = DVector::zeros(k + 1);
    for (a, &i) in support.iter().enumerate() {
        for (b, &j) in support.iter().enumerate() {
            kkt[(a, b)] = inst.q[(i, j)];
        }
        kkt[(a, k)] = 1.0;
        kkt[(k, a)] = 1.0;
        rhs[a] = inst.beta * inst.mu[i];
    }
    rhs[k] = 1.0;
    let sol = kkt.lu().solve(&rhs)?;
    if sol.iter().any(|t| !t.is_finite()) {
        return None;
    }
    let mut x = vec![0.0; inst.dim()];
    for (a, &i) in support.iter().enumerate() {
        x[i] = sol[a];
    }
    let value = inst.smooth_value(&x);
    Some((x, value))
}

/// Exhaustive search over all nonempty supports (`n ≤ 16`). Ties within
/// `1e-12` relative go to the smaller support, then the lexicographically
/// smallest one.
pub fn spo_bruteforce(inst: &PortfolioInstance, rho: f64) -> Result<OracleSolution> {
    let n = inst.dim();
    if n > ORACLE_MAX_DIM {
        return Err(Error::OracleTooLarge {
            n,
            max: ORACLE_MAX_DIM,
        });
    }
    if n == 0 {
        return Err(Error::DimensionMismatch {
            what: "oracle needs at least one asset",
            expected: 1,
            got: 0,
        });
    }
    let candidates: Vec<Option<(Vec<usize>, Vec<f64>, f64)>> = (1u32..(1u32 << n))
        .into_par_iter()
        .map(|mask| {
            let support: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            solve_on_support(inst, &support)
                .map(|(x, f)| (support.clone(), x, f + rho * support.len() as f64))
        })
        .collect();

    let skipped = candidates.iter().filter(|c| c.is_none()).count();
    let mut best: Option<(Vec<usize>, Vec<f64>, f64)> = None;
    for (support, x, value) in candidates.into_iter().flatten() {
        let replace = match &best {
            None => true,
            Some((bs, _, bv)) => {
                let tol = 1e-12 * (1.0 + bv.abs());
                if value < bv - tol {
                    true
                } else if (value - bv).abs() <= tol {
                    support.len() < bs.len() || (support.len() == bs.len() && support < *bs)
                } else {
                    false
                }
            }
        };
        if replace {
            best = Some((support, x, value));
        }
    }
    let (support, x, value) = best.ok_or_else(|| {
        Error::EmptyRestriction("every support produced a singular KKT system".into())
    })?;
    Ok(OracleSolution {
        x,
        value,
        support,
        skipped,
    })
}
