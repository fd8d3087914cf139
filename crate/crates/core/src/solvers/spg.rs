//! Spectral projected gradient with a nonmonotone Armijo line search.
//!
//! Each iteration takes the safeguarded Barzilai–Borwein scalar `σ_k`
//! (`σ_0 = 1`), the direction `d = P(z − ∇F(z)/σ_k) − z`, and backtracks
//! from `t = 1` until
//!
//! ```text
//! F(z + t d) ≤ max_{0 ≤ j < min(k+1, M)} F(z^{k−j}) + t β ∇F(z)ᵀd.
//! ```
//!
//! The accepted point is passed through [`SpgObjective::post_step`], which
//! the penalty subproblem uses to overwrite `s` by `|x|`.

use std::collections::VecDeque;

use super::{dot, inf_norm_diff, stalled, InnerOutcome, InnerStatus, SpgOptions, MIN_STEP};
use crate::error::{check_len, Error, Result};

/// Smooth objective over a convex set with a cheap projection.
pub trait SpgObjective {
    fn dim(&self) -> usize;
    fn value(&self, z: &[f64]) -> f64;
    fn value_and_gradient(&self, z: &[f64], grad: &mut [f64]) -> f64;
    fn project(&self, z: &mut [f64]);
    /// Applied to every accepted point; must not increase `F` or leave the set.
    fn post_step(&self, _z: &mut [f64]) {}
}

/// Safeguarded spectral scalar from the iterate difference `v` and gradient
/// difference `w`. Empty history (first iteration) or `vᵀv = 0` gives 1.
pub fn spectral_step(v: &[f64], w: &[f64], sigma_min: f64, sigma_max: f64) -> f64 {
    let vv = dot(v, v);
    if v.is_empty() || vv == 0.0 {
        return 1.0;
    }
    (dot(v, w) / vv).min(sigma_max).max(sigma_min)
}

/// Line-search record for the transition `z^k → z^{k+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpgStep {
    pub sigma: f64,
    pub f_ref: f64,
    pub step: f64,
    /// `∇F(z^k)ᵀ d^k`.
    pub slope: f64,
    pub trial_value: f64,
    pub backtracks: usize,
}

/// Full record of a run: `iterates[k]` and `values[k]` for `k = 0..=K`,
/// `steps[k]` for `k < K`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpgTrace {
    pub iterates: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub steps: Vec<SpgStep>,
}

fn projected_gradient_residual<P: SpgObjective + ?Sized>(
    obj: &P,
    z: &[f64],
    g: &[f64],
    scratch: &mut [f64],
) -> f64 {
    for ((s, &zi), &gi) in scratch.iter_mut().zip(z).zip(g) {
        *s = zi - gi;
    }
    obj.project(scratch);
    inf_norm_diff(scratch, z)
}

pub fn spg_solve<P: SpgObjective + ?Sized>(
    obj: &P,
    z0: &[f64],
    opts: &SpgOptions,
) -> Result<InnerOutcome> {
    opts.validate()?;
    let n = obj.dim();
    check_len("spg start point", n, z0.len())?;

    let mut z = z0.to_vec();
    obj.project(&mut z);
    obj.post_step(&mut z);
    let mut g = vec![0.0; n];
    let mut f = obj.value_and_gradient(&z, &mut g);

    let mut z_prev = vec![0.0; n];
    let mut g_prev = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut trial = vec![0.0; n];

    let mut history = VecDeque::with_capacity(opts.memory);
    history.push_back(f);
    let mut values = vec![f];
    let mut trace = opts.record_trace.then(|| SpgTrace {
        iterates: vec![z.clone()],
        values: vec![f],
        steps: Vec::new(),
    });

    let mut status = InnerStatus::MaxIterations;
    let mut iterations = 0;
    let mut stationarity = projected_gradient_residual(obj, &z, &g, &mut trial);

    for k in 0..opts.max_iter {
        if stationarity <= opts.stat_tol {
            status = InnerStatus::Converged;
            break;
        }
        let sigma = if k == 0 {
            1.0
        } else {
            for i in 0..n {
                v[i] = z[i] - z_prev[i];
                w[i] = g[i] - g_prev[i];
            }
            spectral_step(&v, &w, opts.sigma_min, opts.sigma_max)
        };

        for i in 0..n {
            trial[i] = z[i] - g[i] / sigma;
        }
        obj.project(&mut trial);
        for i in 0..n {
            d[i] = trial[i] - z[i];
        }
        let slope = dot(&g, &d);
        let f_ref = history.iter().copied().fold(f64::NEG_INFINITY, f64::max);

        let mut t = 1.0;
        let mut backtracks = 0;
        let trial_value = loop {
            for i in 0..n {
                trial[i] = z[i] + t * d[i];
            }
            let ft = obj.value(&trial);
            if ft <= f_ref + t * opts.beta * slope {
                break ft;
            }
            t *= opts.backtrack;
            backtracks += 1;
            if t < MIN_STEP {
                return Err(Error::LineSearchFailed {
                    iteration: k,
                    min_step: MIN_STEP,
                });
            }
        };
        obj.post_step(&mut trial);

        std::mem::swap(&mut z_prev, &mut z);
        std::mem::swap(&mut g_prev, &mut g);
        z.copy_from_slice(&trial);
        f = obj.value_and_gradient(&z, &mut g);
        iterations += 1;

        if history.len() == opts.memory {
            history.pop_front();
        }
        history.push_back(f);
        values.push(f);
        if let Some(tr) = trace.as_mut() {
            tr.steps.push(SpgStep {
                sigma,
                f_ref,
                step: t,
                slope,
                trial_value,
                backtracks,
            });
            tr.iterates.push(z.clone());
            tr.values.push(f);
        }

        stationarity = projected_gradient_residual(obj, &z, &g, &mut trial);
        if stalled(&values, opts.memory, opts.no_progress_window) && stationarity > opts.stat_tol {
            status = InnerStatus::NoProgress;
            break;
        }
    }
    if stationarity <= opts.stat_tol {
        status = InnerStatus::Converged;
    }

    Ok(InnerOutcome {
        z,
        value: f,
        iterations,
        stationarity,
        status,
        values,
        trace,
    })
}

/// Re-derives every quantity of a recorded run from the stored iterates
/// and checks the algorithm's rules: the reference value is the max over
/// the window, `σ_0 = 1` and `σ_k ∈ [σ_min, σ_max]` matches the spectral
/// formula, each accepted step passes the nonmonotone Armijo test, and the
/// next iterate is the post-processed trial point. `check_iterate` runs on
/// every stored iterate (for example `s = |x|`).
pub fn replay_spg_trace<P, C>(
    obj: &P,
    trace: &SpgTrace,
    opts: &SpgOptions,
    mut check_iterate: C,
) -> std::result::Result<(), String>
where
    P: SpgObjective + ?Sized,
    C: FnMut(&[f64]) -> std::result::Result<(), String>,
{
    let n = obj.dim();
    let k_max = trace.steps.len();
    if trace.iterates.len() != k_max + 1 || trace.values.len() != k_max + 1 {
        return Err("trace lengths are inconsistent".into());
    }
    let rel = |a: f64, b: f64| (a - b).abs() / (1.0 + a.abs().max(b.abs()));

    let mut grads = Vec::with_capacity(k_max + 1);
    for (k, z) in trace.iterates.iter().enumerate() {
        let mut g = vec![0.0; n];
        let f = obj.value_and_gradient(z, &mut g);
        if rel(f, trace.values[k]) > 1e-12 {
            return Err(format!("iteration {k}: stored value {} != F(z) = {f}", trace.values[k]));
        }
        check_iterate(z).map_err(|e| format!("iteration {k}: {e}"))?;
        grads.push(g);
    }

    for (k, step) in trace.steps.iter().enumerate() {
        let window = (k + 1).min(opts.memory);
        let f_ref = trace.values[k + 1 - window..=k]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        if f_ref != step.f_ref {
            return Err(format!("iteration {k}: reference {} != window max {f_ref}", step.f_ref));
        }

        let z = &trace.iterates[k];
        let g = &grads[k];
        let sigma = if k == 0 {
            1.0
        } else {
            let zp = &trace.iterates[k - 1];
            let gp = &grads[k - 1];
            let v: Vec<f64> = z.iter().zip(zp).map(|(a, b)| a - b).collect();
            let w: Vec<f64> = g.iter().zip(gp).map(|(a, b)| a - b).collect();
            let vv = dot(&v, &v);
            if vv == 0.0 {
                1.0
            } else {
                (dot(&v, &w) / vv).clamp(opts.sigma_min, opts.sigma_max)
            }
        };
        if k == 0 && step.sigma != 1.0 {
            return Err(format!("first spectral step is {}, expected 1", step.sigma));
        }
        if !(opts.sigma_min..=opts.sigma_max).contains(&step.sigma) && k > 0 {
            return Err(format!("iteration {k}: sigma {} outside safeguards", step.sigma));
        }
        if rel(sigma, step.sigma) > 1e-8 {
            return Err(format!("iteration {k}: sigma {} != recomputed {sigma}", step.sigma));
        }

        let mut target: Vec<f64> = z.iter().zip(g).map(|(zi, gi)| zi - gi / step.sigma).collect();
        obj.project(&mut target);
        let d: Vec<f64> = target.iter().zip(z).map(|(a, b)| a - b).collect();
        let slope = dot(g, &d);
        if slope > 0.0 {
            return Err(format!("iteration {k}: direction is not a descent direction ({slope})"));
        }
        let mut next: Vec<f64> = z.iter().zip(&d).map(|(zi, di)| zi + step.step * di).collect();
        let f_trial = obj.value(&next);
        let bound = step.f_ref + step.step * opts.beta * slope;
        if f_trial > bound + 1e-13 * (1.0 + bound.abs()) {
            return Err(format!(
                "iteration {k}: F(z + t d) = {f_trial} exceeds nonmonotone bound {bound}"
            ));
        }
        obj.post_step(&mut next);
        let gap = inf_norm_diff(&next, &trace.iterates[k + 1]);
        if gap > 1e-12 * (1.0 + next.iter().fold(0.0f64, |m, t| m.max(t.abs()))) {
            return Err(format!("iteration {k}: next iterate differs from replay by {gap:e}"));
        }
    }
    Ok(())
}
