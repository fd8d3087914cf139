//! Separable penalties `p(y) = Σ p_i(y_i)` that replace `ρ‖x‖₀`.
//!
//! Every coordinate penalty must be convex with a unique minimizer `s > 0`,
//! satisfy the scaling `p_i(0) − p_i(s) = ρ`, and be continuously
//! differentiable. All coordinates share the same `p_i`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{check_positive, Error, Result};

/// Default Huber width.
pub const DEFAULT_HUBER_DELTA: f64 = 0.5;

/// User-supplied coordinate penalty, mainly for experimentation and tests.
pub trait CoordinatePenalty: Send + Sync + fmt::Debug {
    fn rho(&self) -> f64;
    fn value(&self, t: f64) -> f64;
    fn derivative(&self, t: f64) -> f64;
    fn minimizer(&self) -> f64;
}

#[derive(Debug, Clone)]
pub enum PenaltyFamily {
    /// `ρ t (t − 2)`, minimizer 1.
    Quadratic { rho: f64 },
    /// `½ (t − √(2ρ))²`, minimizer `√(2ρ)`.
    Shifted { rho: f64 },
    /// Huber smoothing of `c |t − 1|` with width `delta` and `c = ρ / (1 − delta/2)`.
    Huber { rho: f64, delta: f64 },
    Custom(Arc<dyn CoordinatePenalty>),
}

pub fn make_quadratic(rho: f64) -> Result<PenaltyFamily> {
    check_positive("rho", rho)?;
    Ok(PenaltyFamily::Quadratic { rho })
}

pub fn make_shifted_quadratic(rho: f64) -> Result<PenaltyFamily> {
    check_positive("rho", rho)?;
    Ok(PenaltyFamily::Shifted { rho })
}

pub fn make_huber(rho: f64, delta: f64) -> Result<PenaltyFamily> {
    check_positive("rho", rho)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter {
            name: "delta",
            value: delta,
            reason: "must lie in (0, 1)",
        });
    }
    Ok(PenaltyFamily::Huber { rho, delta })
}

impl PenaltyFamily {
    /// Builds a family from its configuration name: `quadratic`, `shifted`,
    /// `huber` or `huber(<delta>)`.
    pub fn from_name(name: &str, rho: f64) -> std::result::Result<Self, FamilyNameError> {
        let spec: FamilySpec = name.parse()?;
        spec.build(rho).map_err(FamilyNameError::Parameter)
    }

    pub fn rho(&self) -> f64 {
        match self {
            Self::Quadratic { rho } | Self::Shifted { rho } | Self::Huber { rho, .. } => *rho,
            Self::Custom(p) => p.rho(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Quadratic { .. } => "quadratic".into(),
            Self::Shifted { .. } => "shifted".into(),
            Self::Huber { delta, .. } => format!("huber({delta})"),
            Self::Custom(_) => "custom".into(),
        }
    }

    fn huber_scale(rho: f64, delta: f64) -> f64 {
        rho / (1.0 - 0.5 * delta)
    }

    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Self::Quadratic { rho } => rho * t * (t - 2.0),
            Self::Shifted { rho } => {
                let r = t - (2.0 * rho).sqrt();
                0.5 * r * r
            }
            Self::Huber { rho, delta } => {
                let c = Self::huber_scale(rho, delta);
                let r = (t - 1.0).abs();
                if r >= delta {
                    c * r
                } else {
                    c * (r * r / (2.0 * delta) + 0.5 * delta)
                }
            }
            Self::Custom(ref p) => p.value(t),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            Self::Quadratic { rho } => 2.0 * rho * (t - 1.0),
            Self::Shifted { rho } => t - (2.0 * rho).sqrt(),
            Self::Huber { rho, delta } => {
                let c = Self::huber_scale(rho, delta);
                let r = t - 1.0;
                if r.abs() >= delta {
                    c * r.signum()
                } else {
                    c * r / delta
                }
            }
            Self::Custom(ref p) => p.derivative(t),
        }
    }

    /// The unique minimizer `s^ρ` of the coordinate penalty.
    pub fn minimizer(&self) -> f64 {
        match *self {
            Self::Quadratic { .. } | Self::Huber { .. } => 1.0,
            Self::Shifted { rho } => (2.0 * rho).sqrt(),
            Self::Custom(ref p) => p.minimizer(),
        }
    }

    /// `m^ρ = p_i(s^ρ)`.
    pub fn min_value(&self) -> f64 {
        match *self {
            Self::Quadratic { rho } => -rho,
            Self::Shifted { .. } => 0.0,
            Self::Huber { rho, delta } => Self::huber_scale(rho, delta) * 0.5 * delta,
            Self::Custom(ref p) => p.value(p.minimizer()),
        }
    }

    /// `M^ρ` for `n` coordinates.
    pub fn total_min_value(&self, n: usize) -> f64 {
        n as f64 * self.min_value()
    }

    /// `p^ρ(y) = Σ p_i(y_i)`.
    pub fn total_value(&self, y: &[f64]) -> f64 {
        y.iter().map(|&t| self.value(t)).sum()
    }
}

/// Outcome of [`check_axioms`]; empty `failures` means every axiom held.
#[derive(Debug, Clone, Default)]
pub struct AxiomCheck {
    pub failures: Vec<String>,
}

impl AxiomCheck {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks convexity with a unique positive minimizer, the `ρ` scaling, the
/// derivative against central differences and `p'(0) < 0`, on a uniform grid
/// over `[−2s, 4s]`.
pub fn check_axioms(family: &PenaltyFamily, grid: usize) -> AxiomCheck {
    let mut failures = Vec::new();
    if grid < 100 {
        failures.push(format!("grid of {grid} points is too coarse (need >= 100)"));
        return AxiomCheck { failures };
    }
    let rho = family.rho();
    let s = family.minimizer();
    if !(s > 0.0 && s.is_finite()) {
        failures.push(format!("minimizer {s} is not positive"));
        return AxiomCheck { failures };
    }

    let scale_gap = family.value(0.0) - family.value(s) - rho;
    if scale_gap.abs() > 1e-10 {
        failures.push(format!("p(0) - p(s) - rho = {scale_gap:e}"));
    }
    let min_gap = family.min_value() - family.value(s);
    if min_gap.abs() > 1e-10 {
        failures.push(format!("stored min value differs from p(s) by {min_gap:e}"));
    }
    if family.derivative(0.0) >= 0.0 {
        failures.push(format!("p'(0) = {} is not negative", family.derivative(0.0)));
    }
    if family.derivative(s).abs() > 1e-10 {
        failures.push(format!("p'(s) = {:e} is not zero", family.derivative(s)));
    }

    let (lo, hi) = (-2.0 * s, 4.0 * s);
    let step = (hi - lo) / (grid - 1) as f64;
    let h = 1e-6 * s.max(1.0);
    let mut prev_derivative = f64::NEG_INFINITY;
    for k in 0..grid {
        let t = lo + step * k as f64;
        let d = family.derivative(t);
        if d < prev_derivative - 1e-12 * (1.0 + d.abs()) {
            failures.push(format!("derivative decreases at t = {t}"));
        }
        prev_derivative = d;

        let off = t - s;
        if off.abs() > 1e-9 * s {
            let sign_ok = if off < 0.0 { d < 0.0 } else { d > 0.0 };
            if !sign_ok {
                failures.push(format!("derivative {d} has wrong sign at t = {t}"));
            }
        }

        let fd = (family.value(t + h) - family.value(t - h)) / (2.0 * h);
        let rel = (fd - d).abs() / d.abs().max(1.0);
        if rel > 1e-6 {
            failures.push(format!("finite difference mismatch {rel:e} at t = {t}"));
        }
    }
    AxiomCheck { failures }
}

/// Family name as used in configuration files.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilySpec {
    Quadratic,
    Shifted,
    Huber(f64),
}

pub const VALID_FAMILY_NAMES: &str = "quadratic, shifted, huber, huber(<delta>)";

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum FamilyNameError {
    #[error("unknown penalty family '{0}' (valid: {VALID_FAMILY_NAMES})")]
    Unknown(String),
    #[error(transparent)]
    Parameter(Error),
}

impl FamilySpec {
    pub fn build(self, rho: f64) -> Result<PenaltyFamily> {
        match self {
            Self::Quadratic => make_quadratic(rho),
            Self::Shifted => make_shifted_quadratic(rho),
            Self::Huber(delta) => make_huber(rho, delta),
        }
    }
}

impl FromStr for FamilySpec {
    type Err = FamilyNameError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let name = s.trim();
        match name {
            "quadratic" => return Ok(Self::Quadratic),
            "shifted" => return Ok(Self::Shifted),
            "huber" => return Ok(Self::Huber(DEFAULT_HUBER_DELTA)),
            _ => {}
        }
        name.strip_prefix("huber(")
            .and_then(|rest| rest.strip_suffix(')'))
            .and_then(|d| d.trim().parse::<f64>().ok())
            .map(Self::Huber)
            .ok_or_else(|| FamilyNameError::Unknown(name.to_string()))
    }
}
