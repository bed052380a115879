//! Numerical tolerances used across the crate.

use serde::{Deserialize, Serialize};

/// Default relative truncation tolerance for the kernel series.
pub const SERIES_TOL: f64 = 1e-15;
/// Default relative tolerance for adaptive quadrature of product-ball volumes.
pub const QUAD_TOL: f64 = 1e-8;
/// Relative step for central finite differences, scaled by `max(1, d, sqrt(t))`.
pub const FD_STEP: f64 = 1e-5;
/// Default signed slack (log scale) allowed when checking an inequality.
pub const INEQUALITY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub series: f64,
    pub quadrature: f64,
    pub finite_difference: f64,
    pub slack: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            series: SERIES_TOL,
            quadrature: QUAD_TOL,
            finite_difference: FD_STEP,
            slack: INEQUALITY_SLACK,
        }
    }
}
