//! Option presets matching the two experiment protocols.

use serde::{Deserialize, Serialize};

use super::{ComplementarityMeasure, OuterOptions, SpgOptions};

/// Options for the penalty methods (`inner`, `outer`) and the thresholding
/// baselines (`baseline`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Protocol {
    pub inner: SpgOptions,
    pub outer: OuterOptions,
    pub baseline: SpgOptions,
}

impl Default for Protocol {
    fn default() -> Self {
        Self::portfolio()
    }
}

impl Protocol {
    /// α₀ = 1 doubled each round, inner tolerance 1e-4 with 1000 iterations,
    /// stop at `max |x_i| y_i ≤ 1e-3`.
    pub fn portfolio() -> Self {
        let inner = SpgOptions {
            stat_tol: 1e-4,
            max_iter: 1000,
            ..Default::default()
        };
        Self {
            baseline: inner.clone(),
            inner,
            outer: OuterOptions {
                alpha0: 1.0,
                alpha_growth: 2.0,
                comp_tol: 1e-3,
                measure: ComplementarityMeasure::Max,
                ..Default::default()
            },
        }
    }

    /// α₀ = 1 grown by 1.5, inner tolerance 1e-5 with 10⁴ iterations, stop at
    /// `Σ |x_i| y_i ≤ 1e-3`; baselines run 10⁵ iterations to 1e-6.
    pub fn dictionary() -> Self {
        Self {
            inner: SpgOptions {
                stat_tol: 1e-5,
                max_iter: 10_000,
                ..Default::default()
            },
            outer: OuterOptions {
                alpha0: 1.0,
                alpha_growth: 1.5,
                comp_tol: 1e-3,
                measure: ComplementarityMeasure::Sum,
                ..Default::default()
            },
            baseline: SpgOptions {
                stat_tol: 1e-6,
                max_iter: 100_000,
                ..Default::default()
            },
        }
    }
}
