use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{rng_for, RngInfo};
use crate::error::{Error, Result};
use crate::geometry::BudgetSet;
use crate::spo::{SmoothObjective, SpoProblem};

/// `min ½xᵀQx − βμᵀx + ρ‖x‖₀  s.t. eᵀx = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioInstance {
    pub q: DMatrix<f64>,
    pub mu: DVector<f64>,
    /// Weight of the expected return.
    pub beta: f64,
    pub rho: f64,
    pub rng: Option<RngInfo>,
}

impl PortfolioInstance {
    pub fn new(q: DMatrix<f64>, mu: DVector<f64>, beta: f64, rho: f64) -> Result<Self> {
        let inst = Self {
            q,
            mu,
            beta,
            rho,
            rng: None,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    /// Checks shapes, finiteness, symmetry (1e-10) and `λ_min(Q) ≥ −1e-8`.
    pub fn validate(&self) -> Result<()> {
        let n = self.mu.len();
        if self.q.nrows() != n || self.q.ncols() != n {
            return Err(Error::InvalidInstance(format!(
                "Q is {}x{} but mu has length {n}",
                self.q.nrows(),
                self.q.ncols()
            )));
        }
        if n == 0 {
            return Err(Error::InvalidInstance("portfolio needs at least one asset".into()));
        }
        if !self.beta.is_finite() || !(self.rho >= 0.0 && self.rho.is_finite()) {
            return Err(Error::InvalidInstance(format!(
                "beta = {} and rho = {} must be finite, rho nonnegative",
                self.beta, self.rho
            )));
        }
        if self.q.iter().chain(self.mu.iter()).any(|t| !t.is_finite()) {
            return Err(Error::InvalidInstance("non-finite entry in Q or mu".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if (self.q[(i, j)] - self.q[(j, i)]).abs() > 1e-10 {
                    return Err(Error::InvalidInstance(format!(
                        "Q is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let min_eig = self.q.clone().symmetric_eigenvalues().min();
        if min_eig < -1e-8 {
            return Err(Error::InvalidInstance(format!(
                "Q has eigenvalue {min_eig:e} below -1e-8"
            )));
        }
        Ok(())
    }

    /// `½xᵀQx − βμᵀx`.
    pub fn smooth_value(&self, x: &[f64]) -> f64 {
        let x = DVector::from_column_slice(x);
        0.5 * x.dot(&(&self.q * &x)) - self.beta * self.mu.dot(&x)
    }

    /// Minimizer of `½xᵀQx − βμᵀx` over `eᵀx = 1` with every asset allowed,
    /// or `e/n` if the KKT system is singular.
    pub fn start_point(&self) -> Vec<f64> {
        let n = self.dim();
        let mut kkt = DMatrix::zeros(n + 1, n + 1);
        kkt.view_mut((0, 0), (n, n)).copy_from(&self.q);
        let mut rhs = DVector::zeros(n + 1);
        for i in 0..n {
            kkt[(i, n)] = 1.0;
            kkt[(n, i)] = 1.0;
            rhs[i] = self.beta * self.mu[i];
        }
        rhs[n] = 1.0;
        match kkt.lu().solve(&rhs) {
            Some(sol) if sol.iter().all(|t| t.is_finite()) => sol.as_slice()[..n].to_vec(),
            _ => vec![1.0 / n as f64; n],
        }
    }
}

#[derive(Debug, Clone)]
pub struct PortfolioObjective {
    q: DMatrix<f64>,
    shifted_mu: DVector<f64>,
}

impl PortfolioObjective {
    pub fn new(inst: &PortfolioInstance) -> Self {
        Self {
            q: inst.q.clone(),
            shifted_mu: &inst.mu * inst.beta,
        }
    }
}

impl SmoothObjective for PortfolioObjective {
    fn dim(&self) -> usize {
        self.shifted_mu.len()
    }

    fn value(&self, v: &[f64]) -> f64 {
        let x = DVector::from_column_slice(v);
        0.5 * x.dot(&(&self.q * &x)) - self.shifted_mu.dot(&x)
    }

    fn gradient(&self, v: &[f64], grad: &mut [f64]) {
        self.value_and_gradient(v, grad);
    }

    fn value_and_gradient(&self, v: &[f64], grad: &mut [f64]) -> f64 {
        let x = DVector::from_column_slice(v);
        let qx = &self.q * &x;
        let f = 0.5 * x.dot(&qx) - self.shifted_mu.dot(&x);
        for (g, (a, b)) in grad.iter_mut().zip(qx.iter().zip(self.shifted_mu.iter())) {
            *g = a - b;
        }
        f
    }
}

/// Builds the problem over the budget set `eᵀx = 1`. Requires `ρ > 0`.
pub fn portfolio_problem(inst: &PortfolioInstance) -> Result<SpoProblem> {
    inst.validate()?;
    SpoProblem::new(
        inst.rho,
        Arc::new(PortfolioObjective::new(inst)),
        Arc::new(BudgetSet { n: inst.dim() }),
    )
}

/// `Q = AᵀA/n + 1e-3·I` with `A` an `n × n` standard normal matrix, `μ`
/// standard normal, `β = ρ = 1`. `A` is drawn row by row, then `μ`.
pub fn gen_portfolio(n: usize, seed: u64) -> Result<PortfolioInstance> {
    if n < 2 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: n as f64,
            reason: "portfolio generator needs at least two assets",
        });
    }
    let mut rng = rng_for(seed);
    let a = DMatrix::from_row_iterator(n, n, (0..n * n).map(|_| rng.sample::<f64, _>(StandardNormal)));
    let mu = DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
    let mut q = a.tr_mul(&a) / n as f64;
    for i in 0..n {
        q[(i, i)] += 1e-3;
    }
    // Exact symmetry regardless of summation order.
    let q = (&q + q.transpose()) * 0.5;
    Ok(PortfolioInstance {
        q,
        mu,
        beta: 1.0,
        rho: 1.0,
        rng: Some(RngInfo::chacha(seed)),
    })
}
