//! Gaussian lower and upper bounds for the heat kernel under Ric ≥ 0.
//!
//! All bounds are accumulated as logarithms; `value` is only the final
//! `exp`, so inputs with d²/4t in the millions still carry a finite
//! `ln_value`.

mod chains;
mod optimize;

use serde::{Deserialize, Serialize};

pub use chains::{bounds_delta1, ChainLink, DeltaOneChains, Relation};
pub use optimize::{optimize_delta, DeltaOptimum, OptimizeSide, DELTA_MAX, DELTA_MIN};

use crate::error::{Error, Result};
use crate::geometry::{euclidean_ball_volume, ModelManifold, Point};
use crate::special::ln_unit_ball_volume;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundFamily {
    Lower,
    LowerSymmetric,
    LowerGeneral,
    Upper,
    UpperSymmetric,
    UpperGeneral,
    LiYauLower,
    LiYauUpper,
}

impl BoundFamily {
    pub fn is_lower(self) -> bool {
        matches!(
            self,
            BoundFamily::Lower | BoundFamily::LowerSymmetric | BoundFamily::LowerGeneral | BoundFamily::LiYauLower
        )
    }
}

/// An evaluated bound together with the quantities it was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub family: BoundFamily,
    pub value: f64,
    pub ln_value: f64,
    pub d: f64,
    pub t: f64,
    pub delta: Option<f64>,
    /// R (R_δ for the δ families, √t for Li–Yau)
    pub radius: f64,
    /// T (T_δ or the caller's T) where the family uses one
    pub time_param: Option<f64>,
    pub f: Option<f64>,
    pub vol_x: f64,
    pub vol_y: f64,
    pub vol_euclidean: f64,
    /// R²/(T−t) + d²/4t − (d−2R)₊²/4T for the general upper bound
    pub exponent: Option<f64>,
    /// Set when the constants behind the bound are not fixed by theory.
    pub illustrative: bool,
}

fn check_td(t: f64, delta: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("time must be positive, got {t}")));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::domain(format!("δ must be positive, got {delta}")));
    }
    Ok(())
}

fn check_d(d: f64) -> Result<()> {
    if !(d >= 0.0) || !d.is_finite() {
        return Err(Error::domain(format!("distance must be non-negative, got {d}")));
    }
    Ok(())
}

/// R_δ(t) = (√(d²+4δt) − d)/2, evaluated as 2δt/(√(d²+4δt) + d).
pub fn r_delta(d: f64, t: f64, delta: f64) -> Result<f64> {
    check_d(d)?;
    check_td(t, delta)?;
    let dt = delta * t;
    Ok(2.0 * dt / ((d * d + 4.0 * dt).sqrt() + d))
}

/// T_δ(t) of the lower bound, with a flag when d = 0 makes it degenerate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerTime {
    pub value: f64,
    pub degenerate: bool,
}

/// T_δ(t) = d t / √(d² + 4δt).
pub fn t_lower(d: f64, t: f64, delta: f64) -> Result<LowerTime> {
    check_d(d)?;
    check_td(t, delta)?;
    if d == 0.0 {
        return Ok(LowerTime { value: 0.0, degenerate: true });
    }
    // d/√(d²+4δt) = 1/√(1 + 4δt/d²), which keeps the d → ∞ limit exact
    let value = t / (1.0 + 4.0 * delta * t / (d * d)).sqrt();
    Ok(LowerTime { value, degenerate: false })
}

/// True when d²/(4δt) ≤ 1/3, the first branch of T_δ and f.
pub fn in_near_branch(rho: f64, delta: f64) -> bool {
    rho / delta <= 1.0 / 3.0
}

/// T_δ(t) of the upper bound.
pub fn t_upper(d: f64, t: f64, delta: f64) -> Result<f64> {
    check_d(d)?;
    check_td(t, delta)?;
    let rho = d * d / (4.0 * t);
    if in_near_branch(rho, delta) {
        Ok((1.0 + delta.sqrt()) * t)
    } else {
        Ok((1.0 + 4.0 * delta * t / (d * d)).sqrt() * t)
    }
}

/// ln f(δ, ρ) for dimension n.
pub fn ln_f_factor(delta: f64, rho: f64, n: usize) -> Result<f64> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::domain(format!("δ must be positive, got {delta}")));
    }
    if !(rho >= 0.0) {
        return Err(Error::domain(format!("ρ must be non-negative, got {rho}")));
    }
    let nf = n as f64;
    let sd = delta.sqrt();
    if in_near_branch(rho, delta) {
        Ok(sd + delta / 3.0 + 0.5 * nf * sd.ln_1p())
    } else {
        Ok(2.0 * delta + 0.25 * nf * (delta / rho).ln_1p())
    }
}

/// f(δ, ρ), the prefactor of the upper bound; ρ = d²/4t.
pub fn f_factor(delta: f64, rho: f64, n: usize) -> Result<f64> {
    Ok(ln_f_factor(delta, rho, n)?.exp())
}

struct Volumes {
    ln_x: f64,
    ln_y: f64,
    ln_euclid: f64,
    x: f64,
    y: f64,
    euclid: f64,
}

fn volumes(m: &ModelManifold, x: &Point, y: &Point, r: f64) -> Result<Volumes> {
    let n = m.dimension();
    let vx = m.ball_volume(x, r)?;
    let vy = m.ball_volume(y, r)?;
    if !(vx > 0.0) || !(vy > 0.0) {
        return Err(Error::precision(format!("ball volume at radius {r} underflowed")));
    }
    Ok(Volumes {
        ln_x: vx.ln(),
        ln_y: vy.ln(),
        ln_euclid: ln_unit_ball_volume(n) + n as f64 * r.ln(),
        x: vx,
        y: vy,
        euclid: euclid_volume(n, r),
    })
}

fn euclid_volume(n: usize, r: f64) -> f64 {
    euclidean_ball_volume(n, r).unwrap_or(f64::NAN)
}

fn ln_gaussian_prefactor(n: usize, t: f64) -> f64 {
    -0.5 * n as f64 * (4.0 * std::f64::consts::PI * t).ln()
}

/// e^{−δ} V_ℝⁿ(R_δ)/V_x(R_δ) (4πt)^{−n/2} e^{−d²/4t}; the symmetric form
/// replaces V_x by √(V_x V_y).
pub fn lower_bound(
    m: &ModelManifold,
    x: &Point,
    y: &Point,
    t: f64,
    delta: f64,
    symmetric: bool,
) -> Result<BoundValue> {
    check_td(t, delta)?;
    let d = m.distance(x, y)?;
    let n = m.dimension();
    let r = r_delta(d, t, delta)?;
    let vol = volumes(m, x, y, r)?;
    let rho = d * d / (4.0 * t);
    let ln_vol = if symmetric { 0.5 * (vol.ln_x + vol.ln_y) } else { vol.ln_x };
    let ln_value = -delta + vol.ln_euclid - ln_vol + ln_gaussian_prefactor(n, t) - rho;
    Ok(BoundValue {
        family: if symmetric { BoundFamily::LowerSymmetric } else { BoundFamily::Lower },
        value: ln_value.exp(),
        ln_value,
        d,
        t,
        delta: Some(delta),
        radius: r,
        time_param: if d > 0.0 { Some(t_lower(d, t, delta)?.value) } else { None },
        f: None,
        vol_x: vol.x,
        vol_y: vol.y,
        vol_euclidean: vol.euclid,
        exponent: None,
        illustrative: false,
    })
}

/// (T/t)^{n/2} e^{−R²/(t−T)} V_ℝⁿ(R)/V_x(R) (4πT)^{−n/2} e^{−d²/4T} for 0 < T < t.
pub fn lower_bound_general(
    m: &ModelManifold,
    x: &Point,
    y: &Point,
    t: f64,
    radius: f64,
    time_param: f64,
) -> Result<BoundValue> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("time must be positive, got {t}")));
    }
    if !(radius > 0.0) {
        return Err(Error::domain(format!("R must be positive, got {radius}")));
    }
    if !(time_param > 0.0 && time_param < t) {
        return Err(Error::domain(format!("need 0 < T < t, got T = {time_param}, t = {t}")));
    }
    let d = m.distance(x, y)?;
    let n = m.dimension();
    let nf = n as f64;
    let vol = volumes(m, x, y, radius)?;
    let ln_value = 0.5 * nf * (time_param / t).ln() - radius * radius / (t - time_param)
        + vol.ln_euclid
        - vol.ln_x
        + ln_gaussian_prefactor(n, time_param)
        - d * d / (4.0 * time_param);
    Ok(BoundValue {
        family: BoundFamily::LowerGeneral,
        value: ln_value.exp(),
        ln_value,
        d,
        t,
        delta: None,
        radius,
        time_param: Some(time_param),
        f: None,
        vol_x: vol.x,
        vol_y: vol.y,
        vol_euclidean: vol.euclid,
        exponent: None,
        illustrative: false,
    })
}

/// The δ-family upper bounds.
///
/// Non-symmetric: f V_x^{−1/2}(R_δ) V_y^{−1/2}(R_δ) e^{−d²/4t}.
/// Symmetric: e^{δ} f² (4πt)^{n/2}/V_ℝⁿ(R_δ) · V_x^{−1}(R_δ) e^{−d²/4t}.
pub fn upper_bound(
    m: &ModelManifold,
    x: &Point,
    y: &Point,
    t: f64,
    delta: f64,
    symmetric: bool,
) -> Result<BoundValue> {
    check_td(t, delta)?;
    let d = m.distance(x, y)?;
    let n = m.dimension();
    let r = r_delta(d, t, delta)?;
    let vol = volumes(m, x, y, r)?;
    let rho = d * d / (4.0 * t);
    let ln_f = ln_f_factor(delta, rho, n)?;
    let ln_value = if symmetric {
        delta + 2.0 * ln_f - ln_gaussian_prefactor(n, t) - vol.ln_euclid - vol.ln_x - rho
    } else {
        ln_f - 0.5 * (vol.ln_x + vol.ln_y) - rho
    };
    Ok(BoundValue {
        family: if symmetric { BoundFamily::UpperSymmetric } else { BoundFamily::Upper },
        value: ln_value.exp(),
        ln_value,
        d,
        t,
        delta: Some(delta),
        radius: r,
        time_param: Some(t_upper(d, t, delta)?),
        f: Some(ln_f.exp()),
        vol_x: vol.x,
        vol_y: vol.y,
        vol_euclidean: vol.euclid,
        exponent: None,
        illustrative: false,
    })
}

/// The exponent R²/(T−t) + d²/4t − (d−2R)₊²/(4T) of the general upper bound.
pub fn upper_exponent(d: f64, t: f64, radius: f64, time_param: f64) -> f64 {
    let gap = (d - 2.0 * radius).max(0.0);
    radius * radius / (time_param - t) + d * d / (4.0 * t) - gap * gap / (4.0 * time_param)
}

/// (T/t)^{n/2} exp(R²/(T−t) + d²/4t − (d−2R)₊²/4T) V_x^{−1/2}(R) V_y^{−1/2}(R) e^{−d²/4t} for T > t.
pub fn upper_bound_general(
    m: &ModelManifold,
    x: &Point,
    y: &Point,
    t: f64,
    radius: f64,
    time_param: f64,
) -> Result<BoundValue> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("time must be positive, got {t}")));
    }
    if !(radius > 0.0) {
        return Err(Error::domain(format!("R must be positive, got {radius}")));
    }
    if !(time_param > t) || !time_param.is_finite() {
        return Err(Error::domain(format!("need T > t, got T = {time_param}, t = {t}")));
    }
    let d = m.distance(x, y)?;
    let nf = m.dimension() as f64;
    let vol = volumes(m, x, y, radius)?;
    let exponent = upper_exponent(d, t, radius, time_param);
    let ln_value = 0.5 * nf * (time_param / t).ln() + exponent
        - 0.5 * (vol.ln_x + vol.ln_y)
        - d * d / (4.0 * t);
    Ok(BoundValue {
        family: BoundFamily::UpperGeneral,
        value: ln_value.exp(),
        ln_value,
        d,
        t,
        delta: None,
        radius,
        time_param: Some(time_param),
        f: None,
        vol_x: vol.x,
        vol_y: vol.y,
        vol_euclidean: vol.euclid,
        exponent: Some(exponent),
        illustrative: false,
    })
}

/// Constants of the classical two-sided bound, C(δ) = c₁ e^{c₂/δ}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiYauConstants {
    pub c1: f64,
    pub c2: f64,
    pub delta: f64,
}

impl LiYauConstants {
    pub fn new(c1: f64, c2: f64, delta: f64) -> Result<Self> {
        if !(c1 > 0.0) || !(c2 > 0.0) {
            return Err(Error::domain(format!("c₁, c₂ must be positive, got {c1}, {c2}")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::domain(format!("Li–Yau δ must lie in (0, 1), got {delta}")));
        }
        Ok(Self { c1, c2, delta })
    }

    pub fn ln_c(&self) -> f64 {
        self.c1.ln() + self.c2 / self.delta
    }
}

/// C⁻¹(δ) V_x⁻¹(√t) e^{−d²/(4(1−δ)t)} and C(δ) V_x⁻¹(√t) e^{−d²/(4(1+δ)t)}.
///
/// The constants are configuration, so both values carry `illustrative`.
pub fn li_yau_bounds(
    m: &ModelManifold,
    x: &Point,
    y: &Point,
    t: f64,
    consts: &LiYauConstants,
) -> Result<(BoundValue, BoundValue)> {
    let consts = LiYauConstants::new(consts.c1, consts.c2, consts.delta)?;
    if !(t > 0.0) {
        return Err(Error::domain(format!("time must be positive, got {t}")));
    }
    let d = m.distance(x, y)?;
    let r = t.sqrt();
    let vol = volumes(m, x, y, r)?;
    let ln_c = consts.ln_c();
    let dd = d * d / (4.0 * t);
    let make = |family, ln_value: f64| BoundValue {
        family,
        value: ln_value.exp(),
        ln_value,
        d,
        t,
        delta: Some(consts.delta),
        radius: r,
        time_param: None,
        f: None,
        vol_x: vol.x,
        vol_y: vol.y,
        vol_euclidean: vol.euclid,
        exponent: None,
        illustrative: true,
    };
    let lower = make(BoundFamily::LiYauLower, -ln_c - vol.ln_x - dd / (1.0 - consts.delta));
    let upper = make(BoundFamily::LiYauUpper, ln_c - vol.ln_x - dd / (1.0 + consts.delta));
    Ok((lower, upper))
}

/// Large-time asymptotes of the δ = 1 bounds on a space with V(r) ~ C r^τ, τ < n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlowGrowthAsymptotes {
    pub tau: usize,
    pub c_m: f64,
    /// ln[ω_n/(e C_M) R^{n−τ} (4πt)^{−n/2} e^{−d²/4t}]
    pub ln_lower: f64,
    /// ln[2^{n/2} e² / C_M · R^{−τ} e^{−d²/4t}]
    pub ln_upper: f64,
    /// ln of the Euclidean Gaussian (4πt)^{−n/2} e^{−d²/4t}
    pub ln_gaussian: f64,
}

/// Asymptotic forms of the δ = 1 bounds when the volume grows slower than rⁿ.
///
/// Returns `None` on spaces with maximal volume growth (τ = n).
pub fn slow_growth_asymptotes(m: &ModelManifold, d: f64, t: f64) -> Result<Option<SlowGrowthAsymptotes>> {
    check_d(d)?;
    check_td(t, 1.0)?;
    let n = m.dimension();
    let (tau, c_m) = m.volume_growth();
    if tau >= n {
        return Ok(None);
    }
    let nf = n as f64;
    let r = r_delta(d, t, 1.0)?;
    let rho = d * d / (4.0 * t);
    let ln_gaussian = ln_gaussian_prefactor(n, t) - rho;
    let ln_lower = ln_unit_ball_volume(n) - 1.0 - c_m.ln() + (nf - tau as f64) * r.ln() + ln_gaussian;
    let ln_upper = 0.5 * nf * 2f64.ln() + 2.0 - c_m.ln() - tau as f64 * r.ln() - rho;
    Ok(Some(SlowGrowthAsymptotes { tau, c_m, ln_lower, ln_upper, ln_gaussian }))
}
