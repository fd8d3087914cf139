//! Dolan–Moré performance profiles.
//!
//! For instance `p` and method `s` with metric `t_{p,s}`, the ratio is
//! `r_{p,s} = t_{p,s} / min_s t_{p,s}` and the curve of `s` is
//! `ρ_s(τ) = |{p : r_{p,s} ≤ τ}| / |P|`. Failed cells have `r = ∞`.
//! Objective values are shifted to `value − best + 1e-12` before taking
//! ratios, so the best method gets ratio 1 even for nonpositive values.

/// Shift applied to objective values before forming ratios.
pub const VALUE_SHIFT: f64 = 1e-12;

/// One `(τ, fraction)` point of a method's step curve. The curve is
/// right-continuous: the fraction holds on `[τ, next τ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub method: String,
    pub tau: f64,
    pub fraction: f64,
}

/// Ratios `r[p][s]` from metrics `t[p][s]` (`None` for failed cells).
/// An instance where every method failed gives `∞` everywhere.
pub fn ratios(metrics: &[Vec<Option<f64>>]) -> Vec<Vec<f64>> {
    metrics
        .iter()
        .map(|row| {
            let best = row.iter().flatten().copied().fold(f64::INFINITY, f64::min);
            row.iter()
                .map(|t| match t {
                    Some(t) if best.is_finite() => t / best,
                    _ => f64::INFINITY,
                })
                .collect()
        })
        .collect()
}

/// Values shifted by the per-instance best, `value − best + 1e-12`.
pub fn shift_values(values: &[Vec<Option<f64>>]) -> Vec<Vec<Option<f64>>> {
    values
        .iter()
        .map(|row| {
            let best = row.iter().flatten().copied().fold(f64::INFINITY, f64::min);
            row.iter().map(|v| v.map(|v| v - best + VALUE_SHIFT)).collect()
        })
        .collect()
}

/// Curve points for every method at each distinct finite ratio, then a
/// final `τ = ∞` point.
pub fn curves(methods: &[String], ratios: &[Vec<f64>]) -> Vec<CurvePoint> {
    let np = ratios.len().max(1) as f64;
    let mut taus: Vec<f64> = ratios
        .iter()
        .flatten()
        .copied()
        .filter(|r| r.is_finite())
        .collect();
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    taus.push(f64::INFINITY);
    let mut out = Vec::with_capacity(methods.len() * taus.len());
    for (s, method) in methods.iter().enumerate() {
        for &tau in &taus {
            let hits = ratios
                .iter()
                .filter(|row| row[s].is_finite() && row[s] <= tau)
                .count();
            out.push(CurvePoint {
                method: method.clone(),
                tau,
                fraction: hits as f64 / np,
            });
        }
    }
    out
}
