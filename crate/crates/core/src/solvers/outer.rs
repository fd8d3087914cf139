use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{
    proxgrad_solve, spg_solve, InnerOutcome, PenaltyComposite, PenaltyEpigraph, SpgOptions,
};
use crate::error::{check_len, check_positive, Error, Result};
use crate::penalty::{check_axioms, PenaltyFamily};
use crate::spo::{
    l0_norm, penalty_objective, spo_objective, OuterRecord, PenaltyIterate, SolveReport,
    SolveStatus, SpoProblem, DEFAULT_ZERO_TOL,
};
use crate::verify::{complementarity, complementarity_sum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerSolver {
    Spg,
    #[serde(alias = "proxgrad")]
    Prox,
}

/// Which complementarity residual stops the outer loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComplementarityMeasure {
    /// `max_i |x_i| y_i`.
    Max,
    /// `Σ_i |x_i| y_i`.
    Sum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OuterOptions {
    pub alpha0: f64,
    pub alpha_growth: f64,
    pub comp_tol: f64,
    pub max_outer: usize,
    pub measure: ComplementarityMeasure,
    pub zero_tol: f64,
}

impl Default for OuterOptions {
    fn default() -> Self {
        Self {
            alpha0: 1.0,
            alpha_growth: 2.0,
            comp_tol: 1e-3,
            max_outer: 50,
            measure: ComplementarityMeasure::Max,
            zero_tol: DEFAULT_ZERO_TOL,
        }
    }
}

impl OuterOptions {
    pub fn validate(&self) -> Result<()> {
        check_positive("alpha0", self.alpha0)?;
        check_positive("comp_tol", self.comp_tol)?;
        if !(self.alpha_growth > 1.0 && self.alpha_growth.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "alpha_growth",
                value: self.alpha_growth,
                reason: "must exceed 1",
            });
        }
        if self.max_outer == 0 {
            return Err(Error::InvalidParameter {
                name: "max_outer",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        if !(self.zero_tol >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "zero_tol",
                value: self.zero_tol,
                reason: "must be nonnegative",
            });
        }
        Ok(())
    }

    fn residual(&self, x: &[f64], y: &[f64]) -> f64 {
        match self.measure {
            ComplementarityMeasure::Max => complementarity(x, y),
            ComplementarityMeasure::Sum => complementarity_sum(x, y),
        }
    }
}

/// Solves the penalized problem for `α = α₀, α₀g, α₀g², …`, warm-starting
/// each inner solve, until the complementarity residual drops to `comp_tol`.
/// Hitting `max_outer` first is reported through [`SolveStatus::MaxOuterReached`].
pub fn exact_penalty_solve(
    problem: &SpoProblem,
    family: &PenaltyFamily,
    start: &[f64],
    inner: InnerSolver,
    inner_opts: &SpgOptions,
    outer_opts: &OuterOptions,
) -> Result<SolveReport> {
    exact_penalty_solve_observed(problem, family, start, inner, inner_opts, outer_opts, |_, _| {})
}

/// As [`exact_penalty_solve`], calling `observer(α, outcome)` after every
/// inner solve (used to audit traces).
pub fn exact_penalty_solve_observed<F>(
    problem: &SpoProblem,
    family: &PenaltyFamily,
    start: &[f64],
    inner: InnerSolver,
    inner_opts: &SpgOptions,
    outer_opts: &OuterOptions,
    mut observer: F,
) -> Result<SolveReport>
where
    F: FnMut(f64, &InnerOutcome),
{
    let clock = Instant::now();
    inner_opts.validate()?;
    outer_opts.validate()?;
    check_len("start point", problem.dim(), start.len())?;
    let axioms = check_axioms(family, 200);
    if !axioms.passed() {
        return Err(Error::Unsupported(format!(
            "penalty family {} violates its axioms: {}",
            family.name(),
            axioms.failures.join("; ")
        )));
    }
    if inner == InnerSolver::Prox && !problem.projector().sparse_block_free() {
        return Err(Error::Unsupported(
            "proximal inner solver needs a feasible set that leaves the sparse block free".into(),
        ));
    }

    let n = problem.sparse_dim();
    let mut primal = start.to_vec();
    problem.projector().project(&mut primal);
    let mut iterate = PenaltyIterate::from_primal(primal, n, family, outer_opts.zero_tol);

    let mut alpha = outer_opts.alpha0;
    let mut trace = Vec::new();
    let mut inner_total = 0;
    let mut status = SolveStatus::MaxOuterReached;
    let mut last_stationarity = f64::INFINITY;

    for k in 0..outer_opts.max_outer {
        if k > 0 {
            alpha *= outer_opts.alpha_growth;
        }
        let outcome = match inner {
            InnerSolver::Spg => {
                let sub = PenaltyEpigraph::new(problem, family, alpha);
                let out = spg_solve(&sub, &sub.pack(&iterate), inner_opts)?;
                iterate = sub.unpack(&out.z);
                out
            }
            InnerSolver::Prox => {
                let sub = PenaltyComposite::new(problem, family, alpha);
                let out = proxgrad_solve(&sub, &sub.pack(&iterate), inner_opts)?;
                iterate = sub.unpack(&out.z);
                out
            }
        };
        observer(alpha, &outcome);
        inner_total += outcome.iterations;
        last_stationarity = outcome.stationarity;

        let comp_max = complementarity(iterate.x(), &iterate.y);
        let comp_sum = complementarity_sum(iterate.x(), &iterate.y);
        trace.push(OuterRecord {
            alpha,
            complementarity: comp_max,
            complementarity_sum: comp_sum,
            inner_iterations: outcome.iterations,
            stationarity: outcome.stationarity,
            inner_status: outcome.status,
        });
        if outer_opts.residual(iterate.x(), &iterate.y) <= outer_opts.comp_tol {
            status = SolveStatus::Converged;
            break;
        }
    }

    let spo_value = spo_objective(problem, &iterate.primal, outer_opts.zero_tol)?;
    let penalty_value = penalty_objective(problem, family, &iterate, alpha)?;
    Ok(SolveReport {
        spo_value,
        penalty_value,
        complementarity: complementarity(iterate.x(), &iterate.y),
        stationarity: last_stationarity,
        inner_iterations: inner_total,
        outer_iterations: trace.len(),
        wall_time: clock.elapsed().as_secs_f64(),
        alpha_final: alpha,
        status,
        l0: l0_norm(iterate.x(), outer_opts.zero_tol),
        alpha_trace: trace,
        final_iterate: iterate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::FreeSet;
    use crate::penalty::make_quadratic;
    use crate::spo::FnObjective;
    use std::sync::Arc;

    fn zero_problem(n: usize) -> SpoProblem {
        let obj = FnObjective::new(n, |_: &[f64]| 0.0, |_: &[f64], g: &mut [f64]| g.fill(0.0));
        SpoProblem::new(1.0, Arc::new(obj), Arc::new(FreeSet::new(n))).unwrap()
    }

    #[test]
    fn pure_sparsity_term_drives_x_to_zero() {
        // Every |x_i| < 2ρ/α₀, so y moves off zero and pushes x to the origin.
        let p = zero_problem(4);
        let fam = make_quadratic(1.0).unwrap();
        for inner in [InnerSolver::Spg, InnerSolver::Prox] {
            let r = exact_penalty_solve(
                &p,
                &fam,
                &[0.5, -1.0, 0.0, 1.5],
                inner,
                &SpgOptions::default(),
                &OuterOptions::default(),
            )
            .unwrap();
            assert_eq!(r.status, SolveStatus::Converged, "{inner:?}");
            assert_eq!(r.complementarity, 0.0);
            assert_eq!(r.spo_value, 0.0);
            assert_eq!(r.l0, 0);
            for &y in &r.final_iterate.y {
                assert!((y - 1.0).abs() <= 1e-4);
            }
        }
    }

    #[test]
    fn alpha_grows_geometrically() {
        let obj = FnObjective::new(
            2,
            |v: &[f64]| 0.5 * ((v[0] - 0.01).powi(2) + (v[1] - 3.0).powi(2)),
            |v: &[f64], g: &mut [f64]| {
                g[0] = v[0] - 0.01;
                g[1] = v[1] - 3.0;
            },
        );
        let p = SpoProblem::new(1e-6, Arc::new(obj), Arc::new(FreeSet::new(2))).unwrap();
        let fam = make_quadratic(1e-6).unwrap();
        let outer = OuterOptions {
            alpha0: 0.5,
            alpha_growth: 3.0,
            comp_tol: 1e-12,
            max_outer: 6,
            ..Default::default()
        };
        let r = exact_penalty_solve(&p, &fam, &[1.0, 1.0], InnerSolver::Spg, &SpgOptions::default(), &outer)
            .unwrap();
        for pair in r.alpha_trace.windows(2) {
            assert_eq!(pair[1].alpha / pair[0].alpha, 3.0);
        }
        assert_eq!(r.alpha_trace[0].alpha, 0.5);
    }

    #[test]
    fn prox_inner_rejects_constrained_sparse_block() {
        let obj = FnObjective::new(2, |_: &[f64]| 0.0, |_: &[f64], g: &mut [f64]| g.fill(0.0));
        let p = SpoProblem::new(
            1.0,
            Arc::new(obj),
            Arc::new(crate::geometry::BudgetSet { n: 2 }),
        )
        .unwrap();
        let fam = make_quadratic(1.0).unwrap();
        let err = exact_penalty_solve(
            &p,
            &fam,
            &[0.5, 0.5],
            InnerSolver::Prox,
            &SpgOptions::default(),
            &OuterOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)));
    }

    #[test]
    fn invalid_outer_options() {
        let bad = OuterOptions {
            alpha_growth: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = OuterOptions {
            comp_tol: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
