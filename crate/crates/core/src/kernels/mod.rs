//! Reference heat kernels on the model-manifold catalog.
//!
//! Products tensorise: H = Π Hᵢ(dᵢ, t). Every factor kernel is carried as a
//! [`RadialJet`] of log-derivatives so that products and ratios stay finite
//! even where the kernel itself underflows.

mod circle;
mod pde;
mod sphere;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use circle::{
    circle_jet, circle_kernel, circle_kernel_image, circle_kernel_spectral, image_jet,
    spectral_jet, spectral_sum, switch_time, SPECTRAL_ROUNDING_LIMIT,
};
pub use pde::{pde_oracle_circle, CrankNicolsonCircle, PdeSolution};
pub use sphere::{legendre_sums, sphere2_jet, sphere2_kernel, LegendreSums, CUT_LOCUS_GUARD};

use crate::error::{Error, Result};
use crate::geometry::{ModelManifold, Point};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesConfig {
    /// Relative truncation tolerance.
    pub tol: f64,
    pub max_terms: usize,
    /// Circle representation switch at `switch_factor · L²/(4π)`.
    pub switch_factor: f64,
    /// Smallest time accepted by the sphere series.
    pub sphere_t_min: f64,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self {
            tol: crate::tolerance::SERIES_TOL,
            max_terms: 10_000,
            switch_factor: 1.0,
            sphere_t_min: 1e-3,
        }
    }
}

impl SeriesConfig {
    pub fn with_tol(tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::usage(format!("series tolerance must be positive, got {tol}")));
        }
        Ok(Self { tol, ..Self::default() })
    }
}

/// Radial data of one kernel factor at a distance d.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialJet {
    pub ln_value: f64,
    /// ∂_d H / H
    pub dlog_d: f64,
    /// Δ H / H
    pub laplacian_ratio: f64,
    /// ∂_t H / H
    pub dt_log: f64,
}

/// Kernel value with its spatial and temporal log-derivatives at (x, y, t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelEval {
    pub value: f64,
    pub ln_value: f64,
    /// |∇_x ln H|²
    pub grad_log_sq: f64,
    /// Δ_x H / H
    pub laplacian_ratio: f64,
    /// ∂_t ln H
    pub dt_log: f64,
}

pub fn euclidean_jet(n: usize, d: f64, t: f64) -> Result<RadialJet> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("time must be positive, got {t}")));
    }
    let nf = n as f64;
    let rho_t = d * d / (4.0 * t * t);
    Ok(RadialJet {
        ln_value: -0.5 * nf * (4.0 * PI * t).ln() - d * d / (4.0 * t),
        dlog_d: -d / (2.0 * t),
        laplacian_ratio: rho_t - nf / (2.0 * t),
        dt_log: rho_t - nf / (2.0 * t),
    })
}

fn factor_jet(
    m: &ModelManifold,
    d: f64,
    t: f64,
    cfg: &SeriesConfig,
    derivatives: bool,
) -> Result<RadialJet> {
    match m {
        ModelManifold::Euclidean { n } => euclidean_jet(*n, d, t),
        ModelManifold::Circle { length } => circle_jet(*length, d, t, cfg),
        ModelManifold::Sphere2 if derivatives => sphere2_jet(d, t, cfg),
        ModelManifold::Sphere2 => {
            let v = sphere2_kernel(d, t, cfg)?;
            Ok(RadialJet { ln_value: v.ln(), dlog_d: f64::NAN, laplacian_ratio: f64::NAN, dt_log: f64::NAN })
        }
        ModelManifold::Product(_) => unreachable!("flattened"),
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("time must be positive, got {t}")));
    }
    Ok(())
}

/// ln H(x, y, t).
pub fn log_heat_kernel(
    m: &ModelManifold,
    x: &Point,
    y: &Point,
    t: f64,
    cfg: &SeriesConfig,
) -> Result<f64> {
    check_time(t)?;
    let dists = m.factor_distances(x, y)?;
    let mut ln = 0.0;
    for (f, d) in m.simple_factors().into_iter().zip(dists) {
        ln += factor_jet(f, d, t, cfg, false)?.ln_value;
    }
    Ok(ln)
}

/// H(x, y, t).
pub fn heat_kernel(
    m: &ModelManifold,
    x: &Point,
    y: &Point,
    t: f64,
    cfg: &SeriesConfig,
) -> Result<f64> {
    Ok(log_heat_kernel(m, x, y, t, cfg)?.exp())
}

/// Kernel value and derivatives in x, combining factor log-derivatives.
pub fn kernel_derivatives(
    m: &ModelManifold,
    x: &Point,
    y: &Point,
    t: f64,
    cfg: &SeriesConfig,
) -> Result<KernelEval> {
    check_time(t)?;
    let dists = m.factor_distances(x, y)?;
    let mut eval = KernelEval {
        value: 0.0,
        ln_value: 0.0,
        grad_log_sq: 0.0,
        laplacian_ratio: 0.0,
        dt_log: 0.0,
    };
    for (f, d) in m.simple_factors().into_iter().zip(dists) {
        let jet = factor_jet(f, d, t, cfg, true)?;
        eval.ln_value += jet.ln_value;
        // factor gradients are orthogonal, so the cross terms of Δ vanish
        eval.grad_log_sq += jet.dlog_d * jet.dlog_d;
        eval.laplacian_ratio += jet.laplacian_ratio;
        eval.dt_log += jet.dt_log;
    }
    eval.value = eval.ln_value.exp();
    Ok(eval)
}

/// Kernel value as a function of the factor distances alone.
pub fn kernel_from_factor_distances(
    m: &ModelManifold,
    dists: &[f64],
    t: f64,
    cfg: &SeriesConfig,
) -> Result<f64> {
    check_time(t)?;
    let factors = m.simple_factors();
    if factors.len() != dists.len() {
        return Err(Error::usage("factor distance count does not match manifold"));
    }
    let mut ln = 0.0;
    for (f, d) in factors.into_iter().zip(dists) {
        ln += factor_jet(f, *d, t, cfg, false)?.ln_value;
    }
    Ok(ln.exp())
}
