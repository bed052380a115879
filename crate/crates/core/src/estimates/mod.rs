//! Constants and right-hand sides of the sharp gradient and Laplacian
//! estimates for ln H, plus the classical inequalities they are built on.

mod classical;

use serde::{Deserialize, Serialize};

pub use classical::{
    check_classical, ClassicalCheck, ClassicalParams, ClassicalRecord, ClassicalReport,
};

use crate::error::{Error, Result};
use crate::special::ln_gamma;

/// C(n) = (n/2) ln 8(n + √(n²+1)) + ln Γ(n/2 + 1) + (5 − √(n²+1))/2.
pub fn c_n(n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    let nf = n as f64;
    let s = (nf * nf + 1.0).sqrt();
    Ok(0.5 * nf * (8.0 * (nf + s)).ln() + ln_gamma(0.5 * nf + 1.0) + 0.5 * (5.0 - s))
}

/// G(x) = (√(1+x²) + x)ⁿ e^{−x²}.
pub fn g_function(n: usize, x: f64) -> f64 {
    ((1.0 + x * x).sqrt() + x).powi(n as i32) * (-x * x).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GMax {
    pub value: f64,
    /// maximiser of G, x² = (√(n²+1) − 1)/2
    pub x_sq: f64,
}

impl GMax {
    pub fn argmax(&self) -> f64 {
        self.x_sq.sqrt()
    }
}

/// sup_{x ≥ 0} G(x) = (√(n²+1) + n)^{n/2} e^{−(√(n²+1)−1)/2}.
pub fn g_max(n: usize) -> Result<GMax> {
    if n < 1 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    let nf = n as f64;
    let s = (nf * nf + 1.0).sqrt();
    let x_sq = 0.5 * (s - 1.0);
    let value = (0.5 * nf * (s + nf).ln() - x_sq).exp();
    Ok(GMax { value, x_sq })
}

fn rho_of(d: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("time must be positive, got {t}")));
    }
    if !(d >= 0.0) || !d.is_finite() {
        return Err(Error::domain(format!("distance must be non-negative, got {d}")));
    }
    Ok(d * d / (4.0 * t))
}

/// ln(√(ρ+1) + √ρ).
fn ln_s(rho: f64) -> f64 {
    rho.sqrt().asinh()
}

/// α*(t, d) = min{1/2, (√(1+ρ) + √ρ)^{−2}}.
pub fn alpha_star(d: f64, t: f64) -> Result<f64> {
    let rho = rho_of(d, t)?;
    Ok((-2.0 * ln_s(rho)).exp().min(0.5))
}

/// max{1/2, 2/(1 + √(1 + 4t/d²))}, the coefficient 1 − α* on the left.
pub fn sharp_coefficient(d: f64, t: f64) -> Result<f64> {
    rho_of(d, t)?;
    if d == 0.0 {
        return Ok(0.5);
    }
    Ok((2.0 / (1.0 + (1.0 + 4.0 * t / (d * d)).sqrt())).max(0.5))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "alpha")]
pub enum EstimateMode {
    Sharp,
    Alpha(f64),
}

/// Coefficient and right-hand side of `coefficient · t · Q ≤ rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateRhs {
    pub lhs_coefficient: f64,
    pub rhs: f64,
    pub d: f64,
    pub t: f64,
    pub n: usize,
    pub mode: EstimateMode,
}

fn alpha_terms(mode: EstimateMode, d: f64, t: f64) -> Result<(f64, bool)> {
    match mode {
        EstimateMode::Sharp => Ok((1.0 - sharp_coefficient(d, t)?, true)),
        EstimateMode::Alpha(a) if a > 0.0 && a < 1.0 => Ok((a, false)),
        EstimateMode::Alpha(a) => Err(Error::domain(format!("α must lie in (0, 1), got {a}"))),
    }
}

/// Right side for t|∇ ln H|².
pub fn gradient_rhs(d: f64, t: f64, n: usize, mode: EstimateMode) -> Result<EstimateRhs> {
    let rho = rho_of(d, t)?;
    let cn = c_n(n)?;
    let nf = n as f64;
    let (alpha, sharp) = alpha_terms(mode, d, t)?;
    let rhs = if sharp {
        cn + 0.5 * nf * std::f64::consts::LN_2 + 2.0 * nf * ln_s(rho) + rho
    } else {
        cn - 0.5 * nf * alpha.ln() + nf * ln_s(rho) + rho
    };
    Ok(EstimateRhs { lhs_coefficient: 1.0 - alpha, rhs, d, t, n, mode })
}

/// Right side for t ΔH/H.
pub fn laplacian_rhs(d: f64, t: f64, n: usize, mode: EstimateMode) -> Result<EstimateRhs> {
    let rho = rho_of(d, t)?;
    let cn = c_n(n)?;
    let nf = n as f64;
    let (alpha, sharp) = alpha_terms(mode, d, t)?;
    let rhs = if sharp {
        nf + 4.0 * cn + 2.0 * nf * std::f64::consts::LN_2 + 8.0 * nf * ln_s(rho) + 4.0 * rho
    } else {
        nf + 4.0 * cn - 2.0 * nf * alpha.ln() + 4.0 * nf * ln_s(rho) + 4.0 * rho
    };
    Ok(EstimateRhs { lhs_coefficient: 1.0 - alpha, rhs, d, t, n, mode })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{LN_2, PI};

    #[test]
    fn c_n_closed_forms() {
        let s2 = 2f64.sqrt();
        let one = 0.5 * (8.0 * (1.0 + s2)).ln() + (PI.sqrt() / 2.0).ln() + (5.0 - s2) / 2.0;
        assert!((c_n(1).unwrap() - one).abs() < 1e-14);
        let s5 = 5f64.sqrt();
        let two = (8.0 * (2.0 + s5)).ln() + (5.0 - s5) / 2.0;
        assert!((c_n(2).unwrap() - two).abs() < 1e-14);
        assert!(c_n(0).is_err());
        for n in 1..10 {
            assert!(c_n(n + 1).unwrap() > c_n(n).unwrap());
        }
    }

    #[test]
    fn g_max_stationary_and_above_origin() {
        for n in 1..=10 {
            let g = g_max(n).unwrap();
            let x = g.argmax();
            let h = 1e-5;
            let slope = (g_function(n, x + h).ln() - g_function(n, x - h).ln()) / (2.0 * h);
            assert!(slope.abs() < 1e-9, "n={n}: {slope}");
            assert!((g_function(n, x) / g.value - 1.0).abs() < 1e-13);
            assert!(g.value >= g_function(n, 0.0));
        }
        assert_eq!(g_function(3, 0.0), 1.0);
    }

    #[test]
    fn alpha_star_examples() {
        assert_eq!(alpha_star(0.0, 1.0).unwrap(), 0.5);
        // ρ = 1 at d = 2, t = 1
        let a = alpha_star(2.0, 1.0).unwrap();
        assert!((a - (3.0 - 2.0 * 2f64.sqrt())).abs() < 1e-15);
        assert!((1.0 - a - sharp_coefficient(2.0, 1.0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn sharp_at_origin() {
        for n in 1..=4 {
            let cn = c_n(n).unwrap();
            let g = gradient_rhs(0.0, 2.0, n, EstimateMode::Sharp).unwrap();
            assert_eq!(g.lhs_coefficient, 0.5);
            assert!((g.rhs - cn - 0.5 * n as f64 * LN_2).abs() < 1e-14);
            let l = laplacian_rhs(0.0, 2.0, n, EstimateMode::Sharp).unwrap();
            assert!((l.rhs - (n as f64 + 4.0 * cn + 2.0 * n as f64 * LN_2)).abs() < 1e-13);
        }
    }

    #[test]
    fn alpha_mode_rejects_bad_alpha() {
        assert!(gradient_rhs(1.0, 1.0, 2, EstimateMode::Alpha(0.0)).is_err());
        assert!(laplacian_rhs(1.0, 1.0, 2, EstimateMode::Alpha(1.0)).is_err());
    }
}
