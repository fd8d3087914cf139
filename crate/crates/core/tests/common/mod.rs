//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(rand_distr::StandardNormal)
}

pub fn inf_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Nearest point of `{|x| ≤ s}` among the point itself (if feasible), its
/// projections onto the two boundary rays and the apex.
pub fn abs_epigraph_oracle(u: f64, v: f64) -> (f64, f64) {
    let mut cands = vec![(0.0, 0.0)];
    if u.abs() <= v {
        cands.push((u, v));
    }
    let t = ((u + v) / 2.0).max(0.0);
    cands.push((t, t));
    let t = ((v - u) / 2.0).max(0.0);
    cands.push((-t, t));
    cands
        .into_iter()
        .min_by(|p, q| {
            let dp = (p.0 - u).powi(2) + (p.1 - v).powi(2);
            let dq = (q.0 - u).powi(2) + (q.1 - v).powi(2);
            dp.total_cmp(&dq)
        })
        .unwrap()
}

/// `α|x|y + ((x−u)² + (y−v)²)/(2γ)`.
pub fn prox_objective(x: f64, y: f64, u: f64, v: f64, alpha: f64, gamma: f64) -> f64 {
    alpha * x.abs() * y + ((x - u).powi(2) + (y - v).powi(2)) / (2.0 * gamma)
}

/// Minimum of [`prox_objective`] over the `points × points` grid of
/// `[−4, 4]²`, keeping only `y ≥ 0` and `x · sign(u) ≥ 0`.
pub fn prox_grid_min(u: f64, v: f64, alpha: f64, gamma: f64, points: usize) -> f64 {
    let h = 8.0 / (points - 1) as f64;
    let coord = |i: usize| -4.0 + h * i as f64;
    (0..points)
        .into_par_iter()
        .map(|i| {
            let x = coord(i);
            if (u > 0.0 && x < 0.0) || (u < 0.0 && x > 0.0) {
                return f64::INFINITY;
            }
            (0..points)
                .map(coord)
                .filter(|&y| y >= 0.0)
                .map(|y| prox_objective(x, y, u, v, alpha, gamma))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min)
}

/// Euclidean projection of `c` onto `{z : G z ≤ h, E z = f}`, computed by
/// ADMM followed by an active-set polish (equality-constrained solve on the
/// detected active rows, accepted only if primal and dual feasible).
pub fn qp_project(
    c: &[f64],
    g: &DMatrix<f64>,
    h: &[f64],
    e: &DMatrix<f64>,
    f: &[f64],
) -> Vec<f64> {
    let n = c.len();
    let (mi, me) = (g.nrows(), e.nrows());
    let m = mi + me;
    let mut a = DMatrix::zeros(m, n);
    a.view_mut((0, 0), (mi, n)).copy_from(g);
    a.view_mut((mi, 0), (me, n)).copy_from(e);
    let lower: Vec<f64> = (0..m)
        .map(|j| if j < mi { f64::NEG_INFINITY } else { f[j - mi] })
        .collect();
    let upper: Vec<f64> = (0..m).map(|j| if j < mi { h[j] } else { f[j - mi] }).collect();

    let rho = 1.0;
    let sigma = 1e-8;
    let relax = 1.6;
    let kkt = DMatrix::identity(n, n) * (1.0 + sigma) + a.transpose() * &a * rho;
    let chol = kkt.cholesky().expect("ADMM system is positive definite");
    let cvec = DVector::from_column_slice(c);
    let mut x = DVector::zeros(n);
    let mut z = DVector::zeros(m);
    let mut y = DVector::zeros(m);
    for _ in 0..50_000 {
        let rhs = &x * sigma + &cvec + a.transpose() * (&z * rho - &y);
        let xt = chol.solve(&rhs);
        let zt = &a * &xt;
        let x_new = &xt * relax + &x * (1.0 - relax);
        let z_relaxed = &zt * relax + &z * (1.0 - relax);
        let mut z_new = &z_relaxed + &y / rho;
        for j in 0..m {
            z_new[j] = z_new[j].clamp(lower[j], upper[j]);
        }
        y += (&z_relaxed - &z_new) * rho;
        let primal = (&a * &x_new - &z_new).amax();
        let dual = (&z_new - &z).amax() * rho;
        x = x_new;
        z = z_new;
        if primal < 1e-12 && dual < 1e-12 {
            break;
        }
    }

    let ax = &a * &x;
    let active: Vec<usize> = (0..m)
        .filter(|&j| j >= mi || y[j] > 1e-9 || ax[j] > upper[j] - 1e-8)
        .collect();
    if let Some(p) = polish(&a, &cvec, &upper, &active, mi) {
        return p.as_slice().to_vec();
    }
    x.as_slice().to_vec()
}

fn polish(
    a: &DMatrix<f64>,
    c: &DVector<f64>,
    rhs: &[f64],
    active: &[usize],
    mi: usize,
) -> Option<DVector<f64>> {
    let n = c.len();
    let k = active.len();
    let mut aa = DMatrix::zeros(k, n);
    let mut bb = DVector::zeros(k);
    for (r, &j) in active.iter().enumerate() {
        aa.set_row(r, &a.row(j));
        bb[r] = rhs[j];
    }
    // z = c − Aᵀν with A A ᵀ ν = A c − b.
    let gram = &aa * aa.transpose();
    let nu = gram.clone().svd(true, true).solve(&(&aa * c - &bb), 1e-12).ok()?;
    let z = c - aa.transpose() * &nu;
    if (&gram * &nu - (&aa * c - &bb)).amax() > 1e-9 {
        return None;
    }
    for (r, &j) in active.iter().enumerate() {
        if j < mi && nu[r] < -1e-9 {
            return None;
        }
    }
    let az = a * &z;
    for j in 0..mi {
        if az[j] > rhs[j] + 1e-9 {
            return None;
        }
    }
    Some(z)
}

/// Projection of `(a, b)` onto `{(x, s) : eᵀx = 1, |x| ≤ s}` through
/// [`qp_project`].
pub fn portfolio_qp_oracle(a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = a.len();
    let mut g = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        g[(2 * i, i)] = 1.0;
        g[(2 * i, n + i)] = -1.0;
        g[(2 * i + 1, i)] = -1.0;
        g[(2 * i + 1, n + i)] = -1.0;
    }
    let mut e = DMatrix::zeros(1, 2 * n);
    for i in 0..n {
        e[(0, i)] = 1.0;
    }
    let c: Vec<f64> = a.iter().chain(b).copied().collect();
    let z = qp_project(&c, &g, &vec![0.0; 2 * n], &e, &[1.0]);
    (z[..n].to_vec(), z[n..].to_vec())
}

/// Residual of the optimality system of the budget-set projection with
/// multipliers `2λ⁺ = max(0, a − b − μ)`, `2λ⁻ = max(0, μ − a − b)`.
pub fn portfolio_kkt_residual(a: &[f64], b: &[f64], x: &[f64], s: &[f64], mu: f64) -> f64 {
    let mut r: f64 = (x.iter().sum::<f64>() - 1.0).abs();
    for i in 0..a.len() {
        let lp = 0.5 * (a[i] - b[i] - mu).max(0.0);
        let lm = 0.5 * (mu - a[i] - b[i]).max(0.0);
        r = r
            .max((x[i] - a[i] + mu + lp - lm).abs())
            .max((s[i] - b[i] - lp - lm).abs())
            .max((x[i] - s[i]).max(0.0))
            .max((-x[i] - s[i]).max(0.0))
            .max(((s[i] - x[i]) * lp).abs())
            .max(((s[i] + x[i]) * lm).abs());
    }
    r
}
