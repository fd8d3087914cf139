//! Nonmonotone proximal gradient for `φ = f₁ + f₂` with `f₁` smooth and an
//! exact prox for `f₂`.
//!
//! The step `γ_k` starts from the inverse spectral scalar (1 on the first
//! iteration) and is halved until
//! `φ(z⁺) ≤ max(last M values of φ) − c‖z⁺ − z‖²/γ_k`.

use std::collections::VecDeque;

use super::spg::spectral_step;
use super::{inf_norm_diff, stalled, InnerOutcome, InnerStatus, SpgOptions, MIN_STEP};
use crate::error::{check_len, Error, Result};

pub trait CompositeObjective {
    fn dim(&self) -> usize;
    fn smooth_value(&self, z: &[f64]) -> f64;
    fn smooth_value_and_gradient(&self, z: &[f64], grad: &mut [f64]) -> f64;
    fn nonsmooth_value(&self, z: &[f64]) -> f64;
    /// Replaces `z` by `prox_{step f₂}(z)`.
    fn prox(&self, z: &mut [f64], step: f64);

    fn value(&self, z: &[f64]) -> f64 {
        self.smooth_value(z) + self.nonsmooth_value(z)
    }
}

/// Runs the method from `z0`, which must lie in the domain of `f₂`.
/// Stops when `‖z⁺ − z‖∞ / γ ≤ stat_tol`.
pub fn proxgrad_solve<P: CompositeObjective + ?Sized>(
    obj: &P,
    z0: &[f64],
    opts: &SpgOptions,
) -> Result<InnerOutcome> {
    opts.validate()?;
    let n = obj.dim();
    check_len("prox-grad start point", n, z0.len())?;

    let mut z = z0.to_vec();
    let mut g = vec![0.0; n];
    let mut phi = obj.smooth_value_and_gradient(&z, &mut g) + obj.nonsmooth_value(&z);
    let mut z_prev = vec![0.0; n];
    let mut g_prev = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut trial = vec![0.0; n];

    let mut history = VecDeque::with_capacity(opts.memory);
    history.push_back(phi);
    let mut values = vec![phi];
    let mut status = InnerStatus::MaxIterations;
    let mut stationarity = f64::INFINITY;
    let mut iterations = 0;

    for k in 0..opts.max_iter {
        let mut gamma = if k == 0 {
            1.0
        } else {
            for i in 0..n {
                v[i] = z[i] - z_prev[i];
                w[i] = g[i] - g_prev[i];
            }
            1.0 / spectral_step(&v, &w, opts.sigma_min, opts.sigma_max)
        };
        let phi_ref = history.iter().copied().fold(f64::NEG_INFINITY, f64::max);

        let phi_trial = loop {
            for i in 0..n {
                trial[i] = z[i] - gamma * g[i];
            }
            obj.prox(&mut trial, gamma);
            let candidate = obj.value(&trial);
            let dist2: f64 = trial.iter().zip(&z).map(|(a, b)| (a - b).powi(2)).sum();
            if candidate <= phi_ref - opts.beta * dist2 / gamma {
                break candidate;
            }
            gamma *= 0.5;
            if gamma < MIN_STEP {
                return Err(Error::StepUnderflow { iteration: k });
            }
        };

        stationarity = inf_norm_diff(&trial, &z) / gamma;
        std::mem::swap(&mut z_prev, &mut z);
        std::mem::swap(&mut g_prev, &mut g);
        z.copy_from_slice(&trial);
        let f1 = obj.smooth_value_and_gradient(&z, &mut g);
        phi = f1 + obj.nonsmooth_value(&z);
        debug_assert!((phi - phi_trial).abs() <= 1e-9 * (1.0 + phi.abs()));
        iterations += 1;

        if history.len() == opts.memory {
            history.pop_front();
        }
        history.push_back(phi);
        values.push(phi);

        if stationarity <= opts.stat_tol {
            status = InnerStatus::Converged;
            break;
        }
        if stalled(&values, opts.memory, opts.no_progress_window) {
            status = InnerStatus::NoProgress;
            break;
        }
    }

    Ok(InnerOutcome {
        z,
        value: phi,
        iterations,
        stationarity,
        status,
        values,
        trace: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Quadratic {
        c: Vec<f64>,
        l1: f64,
    }

    impl CompositeObjective for Quadratic {
        fn dim(&self) -> usize {
            self.c.len()
        }
        fn smooth_value(&self, z: &[f64]) -> f64 {
            0.5 * z.iter().zip(&self.c).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
        }
        fn smooth_value_and_gradient(&self, z: &[f64], g: &mut [f64]) -> f64 {
            for i in 0..z.len() {
                g[i] = z[i] - self.c[i];
            }
            self.smooth_value(z)
        }
        fn nonsmooth_value(&self, z: &[f64]) -> f64 {
            self.l1 * z.iter().map(|t| t.abs()).sum::<f64>()
        }
        fn prox(&self, z: &mut [f64], step: f64) {
            let tau = self.l1 * step;
            z.iter_mut()
                .for_each(|t| *t = t.signum() * (t.abs() - tau).max(0.0));
        }
    }

    #[test]
    fn no_nonsmooth_part_converges_to_center() {
        let obj = Quadratic {
            c: vec![1.0, -2.0, 3.0],
            l1: 0.0,
        };
        let out = proxgrad_solve(&obj, &[0.0; 3], &SpgOptions::default()).unwrap();
        assert_eq!(out.status, InnerStatus::Converged);
        assert!(inf_norm_diff(&out.z, &obj.c) <= 1e-4);
    }

    #[test]
    fn lasso_solution_is_soft_threshold() {
        let obj = Quadratic {
            c: vec![1.0, -0.2, 3.0],
            l1: 0.5,
        };
        let out = proxgrad_solve(&obj, &[4.0, 4.0, 4.0], &SpgOptions::default()).unwrap();
        assert!(inf_norm_diff(&out.z, &[0.5, 0.0, 2.5]) <= 1e-4);
    }

    struct ProxOnly;

    impl CompositeObjective for ProxOnly {
        fn dim(&self) -> usize {
            2
        }
        fn smooth_value(&self, _z: &[f64]) -> f64 {
            0.0
        }
        fn smooth_value_and_gradient(&self, _z: &[f64], g: &mut [f64]) -> f64 {
            g.fill(0.0);
            0.0
        }
        fn nonsmooth_value(&self, z: &[f64]) -> f64 {
            z.iter().map(|t| t.abs()).sum()
        }
        fn prox(&self, z: &mut [f64], step: f64) {
            z.iter_mut()
                .for_each(|t| *t = t.signum() * (t.abs() - step).max(0.0));
        }
    }

    #[test]
    fn zero_smooth_part_reaches_prox_fixed_point() {
        let out = proxgrad_solve(&ProxOnly, &[0.3, -0.7], &SpgOptions::default()).unwrap();
        assert_eq!(out.z, vec![0.0, 0.0]);
        let mut again = out.z.clone();
        ProxOnly.prox(&mut again, 1.0);
        assert_eq!(again, out.z);
    }

    #[test]
    fn values_stay_below_nonmonotone_reference() {
        let obj = Quadratic {
            c: vec![3.0, -1.0, 0.1, 2.0],
            l1: 0.3,
        };
        let opts = SpgOptions::default();
        let out = proxgrad_solve(&obj, &[-5.0, 5.0, 5.0, -5.0], &opts).unwrap();
        for k in 1..out.values.len() {
            let lo = k.saturating_sub(opts.memory);
            let reference = out.values[lo..k].iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert!(out.values[k] <= reference + 1e-12);
        }
    }
}
