//! The penalized problem at a fixed `α`, in the two forms the inner solvers
//! consume.

use super::{CompositeObjective, SpgObjective};
use crate::geometry::prox_sp;
use crate::penalty::PenaltyFamily;
use crate::spo::{PenaltyIterate, SpoProblem};

/// Epigraph form `min f(v) + p(y) + α sᵀy  s.t. v ∈ X, |x| ≤ s, y ≥ 0`
/// over the stacked vector `z = (v, s, y)`.
#[derive(Debug, Clone, Copy)]
pub struct PenaltyEpigraph<'a> {
    pub problem: &'a SpoProblem,
    pub family: &'a PenaltyFamily,
    pub alpha: f64,
}

impl<'a> PenaltyEpigraph<'a> {
    pub fn new(problem: &'a SpoProblem, family: &'a PenaltyFamily, alpha: f64) -> Self {
        Self {
            problem,
            family,
            alpha,
        }
    }

    fn split(&self) -> (usize, usize) {
        (self.problem.dim(), self.problem.sparse_dim())
    }

    pub fn pack(&self, it: &PenaltyIterate) -> Vec<f64> {
        let mut z = Vec::with_capacity(self.dim());
        z.extend_from_slice(&it.primal);
        z.extend_from_slice(&it.s);
        z.extend_from_slice(&it.y);
        z
    }

    pub fn unpack(&self, z: &[f64]) -> PenaltyIterate {
        let (d, n) = self.split();
        PenaltyIterate {
            primal: z[..d].to_vec(),
            s: z[d..d + n].to_vec(),
            y: z[d + n..].to_vec(),
        }
    }
}

impl SpgObjective for PenaltyEpigraph<'_> {
    fn dim(&self) -> usize {
        let (d, n) = self.split();
        d + 2 * n
    }

    fn value(&self, z: &[f64]) -> f64 {
        let (d, n) = self.split();
        let (v, rest) = z.split_at(d);
        let (s, y) = rest.split_at(n);
        let coupling: f64 = s.iter().zip(y).map(|(a, b)| a * b).sum();
        self.problem.smooth_value(v) + self.family.total_value(y) + self.alpha * coupling
    }

    fn value_and_gradient(&self, z: &[f64], grad: &mut [f64]) -> f64 {
        let (d, n) = self.split();
        let (v, rest) = z.split_at(d);
        let (s, y) = rest.split_at(n);
        let (gv, grest) = grad.split_at_mut(d);
        let (gs, gy) = grest.split_at_mut(n);
        let f = self.problem.objective().value_and_gradient(v, gv);
        let mut coupling = 0.0;
        let mut penalty = 0.0;
        for i in 0..n {
            coupling += s[i] * y[i];
            penalty += self.family.value(y[i]);
            gs[i] = self.alpha * y[i];
            gy[i] = self.family.derivative(y[i]) + self.alpha * s[i];
        }
        f + penalty + self.alpha * coupling
    }

    fn project(&self, z: &mut [f64]) {
        let (d, n) = self.split();
        let (v, rest) = z.split_at_mut(d);
        let (s, y) = rest.split_at_mut(n);
        self.problem.projector().project_epigraph(v, s);
        y.iter_mut().for_each(|t| *t = t.max(0.0));
    }

    fn post_step(&self, z: &mut [f64]) {
        let (d, n) = self.split();
        let (v, rest) = z.split_at_mut(d);
        for (si, xi) in rest[..n].iter_mut().zip(&v[..n]) {
            *si = xi.abs();
        }
    }
}

/// Composite form with smooth part `f(v) + p(y)` and nonsmooth part
/// `α Σ|x_i| y_i + ι(y ≥ 0) + ι_X(v)` over `z = (v, y)`. Only valid when the
/// feasible set leaves the sparse block unconstrained.
#[derive(Debug, Clone, Copy)]
pub struct PenaltyComposite<'a> {
    pub problem: &'a SpoProblem,
    pub family: &'a PenaltyFamily,
    pub alpha: f64,
}

impl<'a> PenaltyComposite<'a> {
    pub fn new(problem: &'a SpoProblem, family: &'a PenaltyFamily, alpha: f64) -> Self {
        Self {
            problem,
            family,
            alpha,
        }
    }

    pub fn pack(&self, it: &PenaltyIterate) -> Vec<f64> {
        let mut z = it.primal.clone();
        z.extend_from_slice(&it.y);
        z
    }

    pub fn unpack(&self, z: &[f64]) -> PenaltyIterate {
        let d = self.problem.dim();
        let n = self.problem.sparse_dim();
        PenaltyIterate {
            primal: z[..d].to_vec(),
            s: z[..n].iter().map(|t| t.abs()).collect(),
            y: z[d..].to_vec(),
        }
    }
}

impl CompositeObjective for PenaltyComposite<'_> {
    fn dim(&self) -> usize {
        self.problem.dim() + self.problem.sparse_dim()
    }

    fn smooth_value(&self, z: &[f64]) -> f64 {
        let d = self.problem.dim();
        self.problem.smooth_value(&z[..d]) + self.family.total_value(&z[d..])
    }

    fn smooth_value_and_gradient(&self, z: &[f64], grad: &mut [f64]) -> f64 {
        let d = self.problem.dim();
        let (v, y) = z.split_at(d);
        let (gv, gy) = grad.split_at_mut(d);
        let f = self.problem.objective().value_and_gradient(v, gv);
        let mut penalty = 0.0;
        for (g, &t) in gy.iter_mut().zip(y) {
            penalty += self.family.value(t);
            *g = self.family.derivative(t);
        }
        f + penalty
    }

    fn nonsmooth_value(&self, z: &[f64]) -> f64 {
        let d = self.problem.dim();
        let n = self.problem.sparse_dim();
        let coupling: f64 = z[..n].iter().zip(&z[d..]).map(|(x, y)| x.abs() * y).sum();
        self.alpha * coupling
    }

    fn prox(&self, z: &mut [f64], step: f64) {
        let d = self.problem.dim();
        let n = self.problem.sparse_dim();
        let (v, y) = z.split_at_mut(d);
        for i in 0..n {
            (v[i], y[i]) = prox_sp(v[i], y[i], self.alpha, step);
        }
        self.problem.projector().project(v);
    }
}
