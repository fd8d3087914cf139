//! Closed-form projections and proximal maps.
//!
//! The [`Projector`] trait describes the feasible set of a problem over its
//! primal vector `v = (x, w)`, where `x` (the first `sparse_dim` entries) is
//! the sparsity-regularized block and `w` holds any extra variables.

use std::fmt;

use crate::error::{check_len, Error, Result};

/// Bracket-width tolerance and iteration cap for the budget-set root search.
pub const BISECTION_TOL: f64 = 1e-12;
pub const BISECTION_MAX_ITER: usize = 200;

pub fn project_nonneg(w: &[f64]) -> Vec<f64> {
    w.iter().map(|&t| t.max(0.0)).collect()
}

pub fn project_box(z: &[f64], lo: &[f64], hi: &[f64]) -> Result<Vec<f64>> {
    check_len("box lower bound", z.len(), lo.len())?;
    check_len("box upper bound", z.len(), hi.len())?;
    validate_box(lo, hi)?;
    Ok(z.iter()
        .zip(lo.iter().zip(hi))
        .map(|(&t, (&l, &h))| t.clamp(l, h))
        .collect())
}

fn validate_box(lo: &[f64], hi: &[f64]) -> Result<()> {
    match lo.iter().zip(hi).position(|(l, h)| !(l <= h)) {
        Some(i) => Err(Error::InvalidParameter {
            name: "box bounds",
            value: lo[i],
            reason: "lower bound exceeds upper bound",
        }),
        None => Ok(()),
    }
}

/// Projection of `(u, v)` onto `{(x, s) : |x| ≤ s}`.
pub fn project_abs_epigraph(u: f64, v: f64) -> (f64, f64) {
    if u.abs() <= v {
        (u, v)
    } else if u.abs() <= -v {
        (0.0, 0.0)
    } else if u > v.abs() {
        let m = 0.5 * (u + v);
        (m, m)
    } else {
        (0.5 * (u - v), 0.5 * (v - u))
    }
}

/// `t(u) = Σ max(0, a_i + b_i − u) − max(0, b_i − a_i + u) − 2`.
pub fn portfolio_root_function(a: &[f64], b: &[f64], u: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&ai, &bi)| (ai + bi - u).max(0.0) - (bi - ai + u).max(0.0))
        .sum::<f64>()
        - 2.0
}

/// Bracket `(lower, upper)` with `t(lower) ≥ 0 ≥ t(upper)`.
pub fn portfolio_root_bracket(a: &[f64], b: &[f64]) -> (f64, f64) {
    let n = a.len() as f64;
    let mut hi = f64::NEG_INFINITY;
    let mut lo = f64::INFINITY;
    for (&ai, &bi) in a.iter().zip(b) {
        hi = hi.max(ai + bi).max(ai - bi);
        lo = lo.min(ai + bi).min(ai - bi);
    }
    (lo - 2.0 / n, hi)
}

/// Root of the decreasing piecewise-linear function [`portfolio_root_function`]
/// by bisection. The root is unique: `t` has slope zero only where every
/// term vanishes, and there `t = −2`.
pub fn portfolio_root(a: &[f64], b: &[f64]) -> Result<f64> {
    check_len("portfolio b", a.len(), b.len())?;
    if a.is_empty() {
        return Err(Error::DimensionMismatch {
            what: "portfolio projection needs n >= 1",
            expected: 1,
            got: 0,
        });
    }
    let (mut lo, mut hi) = portfolio_root_bracket(a, b);
    let (t_lo, t_hi) = (
        portfolio_root_function(a, b, lo),
        portfolio_root_function(a, b, hi),
    );
    if !(t_lo >= 0.0 && t_hi <= 0.0) {
        return Err(Error::BracketFailure {
            lower: lo,
            upper: hi,
            t_lower: t_lo,
            t_upper: t_hi,
        });
    }
    for _ in 0..BISECTION_MAX_ITER {
        if hi - lo <= BISECTION_TOL * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let t = portfolio_root_function(a, b, mid);
        if t > 0.0 {
            lo = mid;
        } else if t < 0.0 {
            hi = mid;
        } else {
            return Ok(mid);
        }
    }
    // Final linear interpolation inside the bracket; t is affine there
    // unless a breakpoint lies inside it.
    let (t_lo, t_hi) = (
        portfolio_root_function(a, b, lo),
        portfolio_root_function(a, b, hi),
    );
    if t_lo > t_hi {
        let mu = lo + (hi - lo) * t_lo / (t_lo - t_hi);
        if mu.is_finite() && (lo..=hi).contains(&mu) {
            return Ok(mu);
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioProjection {
    pub x: Vec<f64>,
    pub s: Vec<f64>,
    /// Multiplier of the budget constraint.
    pub mu: f64,
}

/// Projection of `(a, b)` onto `{(x, s) : eᵀx = 1, |x| ≤ s}`.
pub fn project_portfolio(a: &[f64], b: &[f64]) -> Result<PortfolioProjection> {
    let mu = portfolio_root(a, b)?;
    let mut x = Vec::with_capacity(a.len());
    let mut s = Vec::with_capacity(a.len());
    for (&ai, &bi) in a.iter().zip(b) {
        let plus = (ai + bi - mu).max(0.0);
        let minus = (bi - ai + mu).max(0.0);
        x.push(0.5 * (plus - minus));
        s.push(0.5 * (plus + minus));
    }
    Ok(PortfolioProjection { x, s, mu })
}

/// Proximal map of `(x, y) ↦ α|x|y` restricted to `y ≥ 0`, with step `gamma`.
pub fn prox_sp(u: f64, v: f64, alpha: f64, gamma: f64) -> (f64, f64) {
    let sign = if u < 0.0 { -1.0 } else { 1.0 };
    let u = u.abs();
    let (x, y) = if v < 0.0 {
        (u, 0.0)
    } else {
        let ga = gamma * alpha;
        if ga < 1.0 && ga * v <= u && u * ga <= v {
            let denom = 1.0 - ga * ga;
            (((u - ga * v) / denom).max(0.0), ((v - ga * u) / denom).max(0.0))
        } else if v >= u {
            (0.0, v)
        } else {
            (u, 0.0)
        }
    };
    (sign * x, y)
}

/// Objective of the scalar prox subproblem, used by tests and audits.
pub fn prox_sp_objective(x: f64, y: f64, u: f64, v: f64, alpha: f64, gamma: f64) -> f64 {
    alpha * x.abs() * y + ((x - u).powi(2) + (y - v).powi(2)) / (2.0 * gamma)
}

/// Scales every row of the row-major `rows × cols` matrix to norm at most one.
pub fn project_row_norm_ball(data: &mut [f64], rows: usize, cols: usize) {
    debug_assert_eq!(data.len(), rows * cols);
    for row in data.chunks_exact_mut(cols.max(1)).take(rows) {
        let norm = row.iter().map(|t| t * t).sum::<f64>().sqrt();
        if norm > 1.0 {
            row.iter_mut().for_each(|t| *t /= norm);
        }
    }
}

/// Feasible set of a problem, accessed only through projections.
pub trait Projector: Send + Sync + fmt::Debug {
    /// Length of the full primal vector.
    fn dim(&self) -> usize;
    /// Length of the leading sparse block.
    fn sparse_dim(&self) -> usize;
    /// Projects `v` onto the feasible set.
    fn project(&self, v: &mut [f64]);
    /// Projects `(v, s)` onto `{(v, s) : v feasible, |x| ≤ s}`.
    fn project_epigraph(&self, v: &mut [f64], s: &mut [f64]);
    /// Projects onto the feasible set intersected with `x_i = 0` for every
    /// `i` where `support[i]` is false.
    fn project_restricted(&self, v: &mut [f64], support: &[bool]) -> Result<()>;
    /// Distance-like infeasibility measure; zero on the set.
    fn residual(&self, v: &[f64]) -> f64;
    /// True when the set places no constraint on the sparse block.
    fn sparse_block_free(&self) -> bool;
}

fn project_epigraph_free(x: &mut [f64], s: &mut [f64]) {
    for (xi, si) in x.iter_mut().zip(s.iter_mut()) {
        (*xi, *si) = project_abs_epigraph(*xi, *si);
    }
}

/// The whole space.
#[derive(Debug, Clone)]
pub struct FreeSet {
    pub dim: usize,
    pub sparse_dim: usize,
}

impl FreeSet {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            sparse_dim: dim,
        }
    }
}

impl Projector for FreeSet {
    fn dim(&self) -> usize {
        self.dim
    }
    fn sparse_dim(&self) -> usize {
        self.sparse_dim
    }
    fn project(&self, _v: &mut [f64]) {}
    fn project_epigraph(&self, v: &mut [f64], s: &mut [f64]) {
        project_epigraph_free(&mut v[..self.sparse_dim], s);
    }
    fn project_restricted(&self, v: &mut [f64], support: &[bool]) -> Result<()> {
        zero_outside(&mut v[..self.sparse_dim], support);
        Ok(())
    }
    fn residual(&self, _v: &[f64]) -> f64 {
        0.0
    }
    fn sparse_block_free(&self) -> bool {
        true
    }
}

fn zero_outside(x: &mut [f64], support: &[bool]) {
    for (xi, &keep) in x.iter_mut().zip(support) {
        if !keep {
            *xi = 0.0;
        }
    }
}

/// Componentwise bounds on the (fully sparse) primal vector.
#[derive(Debug, Clone)]
pub struct BoxSet {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxSet {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        check_len("box upper bound", lo.len(), hi.len())?;
        validate_box(&lo, &hi)?;
        Ok(Self { lo, hi })
    }

    /// Projection of `(u, v)` onto `{|x| ≤ s, lo ≤ x ≤ hi}`. When the
    /// epigraph projection violates a bound, the answer lies on one of the
    /// two rays `x = lo` or `x = hi`, `s ≥ |x|`.
    fn project_pair(u: f64, v: f64, lo: f64, hi: f64) -> (f64, f64) {
        let (x, s) = project_abs_epigraph(u, v);
        if x >= lo && x <= hi {
            return (x, s);
        }
        let on_ray = |b: f64| (b, v.max(b.abs()));
        let dist = |(x, s): (f64, f64)| (x - u).powi(2) + (s - v).powi(2);
        let (a, b) = (on_ray(lo), on_ray(hi));
        if dist(a) <= dist(b) {
            a
        } else {
            b
        }
    }
}

impl Projector for BoxSet {
    fn dim(&self) -> usize {
        self.lo.len()
    }
    fn sparse_dim(&self) -> usize {
        self.lo.len()
    }
    fn project(&self, v: &mut [f64]) {
        for ((t, &l), &h) in v.iter_mut().zip(&self.lo).zip(&self.hi) {
            *t = t.clamp(l, h);
        }
    }
    fn project_epigraph(&self, v: &mut [f64], s: &mut [f64]) {
        for (i, (xi, si)) in v.iter_mut().zip(s.iter_mut()).enumerate() {
            (*xi, *si) = Self::project_pair(*xi, *si, self.lo[i], self.hi[i]);
        }
    }
    fn project_restricted(&self, v: &mut [f64], support: &[bool]) -> Result<()> {
        for (i, &keep) in support.iter().enumerate() {
            if !keep && !(self.lo[i] <= 0.0 && 0.0 <= self.hi[i]) {
                return Err(Error::EmptyRestriction(format!(
                    "x[{i}] = 0 violates bounds [{}, {}]",
                    self.lo[i], self.hi[i]
                )));
            }
        }
        self.project(v);
        zero_outside(v, support);
        Ok(())
    }
    fn residual(&self, v: &[f64]) -> f64 {
        v.iter()
            .zip(&self.lo)
            .zip(&self.hi)
            .map(|((&t, &l), &h)| (l - t).max(t - h).max(0.0))
            .fold(0.0, f64::max)
    }
    fn sparse_block_free(&self) -> bool {
        false
    }
}

/// The budget hyperplane `{x : eᵀx = 1}`.
#[derive(Debug, Clone)]
pub struct BudgetSet {
    pub n: usize,
}

impl Projector for BudgetSet {
    fn dim(&self) -> usize {
        self.n
    }
    fn sparse_dim(&self) -> usize {
        self.n
    }
    fn project(&self, v: &mut [f64]) {
        let shift = (1.0 - v.iter().sum::<f64>()) / self.n as f64;
        v.iter_mut().for_each(|t| *t += shift);
    }
    fn project_epigraph(&self, v: &mut [f64], s: &mut [f64]) {
        let p = project_portfolio(v, s).expect("finite portfolio projection input");
        v.copy_from_slice(&p.x);
        s.copy_from_slice(&p.s);
    }
    fn project_restricted(&self, v: &mut [f64], support: &[bool]) -> Result<()> {
        let k = support.iter().filter(|&&b| b).count();
        if k == 0 {
            return Err(Error::EmptyRestriction(
                "budget constraint cannot hold with empty support".into(),
            ));
        }
        zero_outside(v, support);
        let shift = (1.0 - v.iter().sum::<f64>()) / k as f64;
        for (t, &keep) in v.iter_mut().zip(support) {
            if keep {
                *t += shift;
            }
        }
        Ok(())
    }
    fn residual(&self, v: &[f64]) -> f64 {
        (v.iter().sum::<f64>() - 1.0).abs()
    }
    fn sparse_block_free(&self) -> bool {
        false
    }
}

/// Dictionary-learning constraint: the code block is free, the dictionary
/// block (an `l × n` matrix stored column-major after the codes) has rows of
/// norm at most one.
#[derive(Debug, Clone)]
pub struct RowBallSet {
    pub code_len: usize,
    pub rows: usize,
    pub cols: usize,
}

impl RowBallSet {
    /// Scales every row of the column-major `rows × cols` block `d` into the unit ball.
    pub fn project_dictionary(&self, d: &mut [f64]) {
        let l = self.rows;
        for i in 0..l {
            let norm = (0..self.cols)
                .map(|j| d[i + l * j] * d[i + l * j])
                .sum::<f64>()
                .sqrt();
            if norm > 1.0 {
                for j in 0..self.cols {
                    d[i + l * j] /= norm;
                }
            }
        }
    }
}

impl Projector for RowBallSet {
    fn dim(&self) -> usize {
        self.code_len + self.rows * self.cols
    }
    fn sparse_dim(&self) -> usize {
        self.code_len
    }
    fn project(&self, v: &mut [f64]) {
        self.project_dictionary(&mut v[self.code_len..]);
    }
    fn project_epigraph(&self, v: &mut [f64], s: &mut [f64]) {
        let (codes, dict) = v.split_at_mut(self.code_len);
        project_epigraph_free(codes, s);
        self.project_dictionary(dict);
    }
    fn project_restricted(&self, v: &mut [f64], support: &[bool]) -> Result<()> {
        zero_outside(&mut v[..self.code_len], support);
        self.project(v);
        Ok(())
    }
    fn residual(&self, v: &[f64]) -> f64 {
        let d = &v[self.code_len..];
        let l = self.rows;
        (0..l)
            .map(|i| {
                let norm = (0..self.cols)
                    .map(|j| d[i + l * j] * d[i + l * j])
                    .sum::<f64>()
                    .sqrt();
                (norm - 1.0).max(0.0)
            })
            .fold(0.0, f64::max)
    }
    fn sparse_block_free(&self) -> bool {
        true
    }
}
