//! Heat kernel of the circle of length L in its two dual forms: the
//! periodised Gaussian (image sum) and the Fourier series.

use std::f64::consts::PI;

use super::{RadialJet, SeriesConfig};
use crate::error::{Error, Result};

fn check_args(length: f64, d: f64, t: f64) -> Result<()> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("time must be positive, got {t}")));
    }
    if !(length > 0.0) {
        return Err(Error::domain(format!("circle length must be positive, got {length}")));
    }
    if !(d >= 0.0) || d > 0.5 * length * (1.0 + 1e-12) {
        return Err(Error::domain(format!(
            "arc distance {d} outside [0, L/2] for L = {length}"
        )));
    }
    Ok(())
}

/// Largest accepted relative rounding estimate of the spectral sum.
pub const SPECTRAL_ROUNDING_LIMIT: f64 = 1e-10;

/// Time above which the spectral sum is used instead of the image sum.
pub fn switch_time(length: f64, cfg: &SeriesConfig) -> f64 {
    cfg.switch_factor * length * length / (4.0 * PI)
}

/// Heat kernel value H(d, t) on the circle, picking the faster representation.
pub fn circle_kernel(length: f64, d: f64, t: f64, cfg: &SeriesConfig) -> Result<f64> {
    Ok(circle_jet(length, d, t, cfg)?.ln_value.exp())
}

pub fn circle_jet(length: f64, d: f64, t: f64, cfg: &SeriesConfig) -> Result<RadialJet> {
    if t < switch_time(length, cfg) {
        image_jet(length, d, t, cfg)
    } else {
        spectral_jet(length, d, t, cfg)
    }
}

/// Σ_k (4πt)^{-1/2} exp(-(d+kL)²/4t).
pub fn circle_kernel_image(length: f64, d: f64, t: f64, cfg: &SeriesConfig) -> Result<f64> {
    Ok(image_jet(length, d, t, cfg)?.ln_value.exp())
}

/// L⁻¹ (1 + 2 Σ_j exp(-(2πj/L)² t) cos(2πj d/L)).
pub fn circle_kernel_spectral(length: f64, d: f64, t: f64, cfg: &SeriesConfig) -> Result<f64> {
    Ok(spectral_jet(length, d, t, cfg)?.ln_value.exp())
}

pub fn image_jet(length: f64, d: f64, t: f64, cfg: &SeriesConfig) -> Result<RadialJet> {
    check_args(length, d, t)?;
    let d = d.min(0.5 * length);
    // weights relative to the k = 0 image, all ≤ 1 because d ≤ L/2
    let term = |u: f64| {
        let w = (-(u * u - d * d) / (4.0 * t)).exp();
        (w, w * (-u / (2.0 * t)), w * (u * u / (4.0 * t * t) - 0.5 / t))
    };
    let (mut s0, mut s1, mut s2) = term(d);
    let mut converged = false;
    for k in 1..=cfg.max_terms {
        let kl = k as f64 * length;
        let a = term(d + kl);
        let b = term(d - kl);
        s0 += a.0 + b.0;
        s1 += a.1 + b.1;
        s2 += a.2 + b.2;
        let u = kl - d;
        let poly = 1.0 + u / (2.0 * t) + u * u / (4.0 * t * t) + 0.5 / t;
        if a.0.max(b.0) * poly < cfg.tol * s0 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::precision("circle image sum did not converge"));
    }
    let ln_gauss = -0.5 * (4.0 * PI * t).ln() - d * d / (4.0 * t);
    Ok(RadialJet {
        ln_value: ln_gauss + s0.ln(),
        dlog_d: s1 / s0,
        laplacian_ratio: s2 / s0,
        dt_log: s2 / s0,
    })
}

/// The spectral sum without the positivity check, accurate in absolute
/// terms even where the kernel is below rounding.
pub fn spectral_sum(length: f64, d: f64, t: f64, cfg: &SeriesConfig) -> Result<f64> {
    check_args(length, d, t)?;
    let mut s0 = 1.0;
    for j in 1..=cfg.max_terms {
        let kappa = 2.0 * PI * j as f64 / length;
        let decay = (-kappa * kappa * t).exp();
        s0 += 2.0 * decay * (kappa * d).cos();
        if 2.0 * decay < cfg.tol {
            return Ok(s0 / length);
        }
    }
    Err(Error::precision("circle spectral sum did not converge"))
}

pub fn spectral_jet(length: f64, d: f64, t: f64, cfg: &SeriesConfig) -> Result<RadialJet> {
    check_args(length, d, t)?;
    let mut s0 = 1.0;
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    let mut st = 0.0;
    let mut abs_sum = 1.0;
    let mut converged = false;
    for j in 1..=cfg.max_terms {
        let kappa = 2.0 * PI * j as f64 / length;
        let lambda = kappa * kappa;
        let decay = (-lambda * t).exp();
        let (sin, cos) = (kappa * d).sin_cos();
        s0 += 2.0 * decay * cos;
        s1 += -2.0 * decay * kappa * sin;
        s2 += -2.0 * decay * lambda * cos;
        st += -2.0 * decay * lambda * cos;
        abs_sum += 2.0 * decay;
        if 2.0 * decay * (1.0 + kappa + lambda) < cfg.tol * s0.abs() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::precision("circle spectral sum did not converge"));
    }
    if !(s0 > 0.0) {
        return Err(Error::precision("circle spectral sum lost positivity"));
    }
    // cancellation: rounding of the partial sums scales with Σ|terms|
    let err = 4.0 * f64::EPSILON * abs_sum;
    if err > SPECTRAL_ROUNDING_LIMIT * s0 {
        return Err(Error::precision(format!(
            "circle spectral sum at d = {d}, t = {t} is below its rounding floor (estimated relative error {:.1e})",
            err / s0
        )));
    }
    Ok(RadialJet {
        ln_value: s0.ln() - length.ln(),
        dlog_d: s1 / s0,
        laplacian_ratio: s2 / s0,
        dt_log: st / s0,
    })
}
