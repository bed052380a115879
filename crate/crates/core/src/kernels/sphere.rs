//! Heat kernel of the unit 2-sphere as a Legendre series
//! Σ (2l+1)/(4π) e^{-l(l+1)t} P_l(cos d).

use std::f64::consts::PI;

use twofloat::TwoFloat;

use super::{RadialJet, SeriesConfig};
use crate::error::{Error, Result};

/// Relative rounding error above which a sphere evaluation is rejected.
pub const SPHERE_ROUNDING_LIMIT: f64 = 1e-10;

/// Unit roundoff of the double-double accumulation, with headroom.
const DD_EPSILON: f64 = 1e-30;

const PI_DD_LO: f64 = 1.224_646_799_147_353_2e-16;

/// Raw partial sums of the Legendre series in x = cos d.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegendreSums {
    /// F(x) = H
    pub value: f64,
    /// F'(x)
    pub dx: f64,
    /// F''(x)
    pub dxx: f64,
    /// ∂_t F
    pub dt: f64,
    /// (1 − x²) F'' − 2x F', the Laplacian of H in x
    pub laplacian: f64,
    /// Σ |c_l P_l|, the scale of rounding in `value`
    pub abs_value: f64,
    /// Σ |c_l| (|P_l'| + |P_l''|), the scale of rounding in the derivatives
    pub abs_derivs: f64,
    pub terms: usize,
}

/// e^y to double-double accuracy: halve until |y| ≤ 1e-3, Taylor, square back.
fn exp_dd(y: f64) -> TwoFloat {
    let mut r = y;
    let mut halvings = 0;
    while r.abs() > 1e-3 {
        r *= 0.5;
        halvings += 1;
    }
    let r = TwoFloat::from(r);
    let mut term = TwoFloat::from(1.0);
    let mut sum = TwoFloat::from(1.0);
    for i in 1..=11 {
        term = term * r / i as f64;
        sum += term;
    }
    for _ in 0..halvings {
        sum = sum * sum;
    }
    sum
}

/// cos d as a double-double, built from 1 ∓ 2 sin²(·/2) so that 1 ± x keeps
/// its relative accuracy near both poles.
fn cos_dd(d: f64) -> TwoFloat {
    if d <= 0.5 * PI {
        let s = (0.5 * d).sin();
        TwoFloat::from(1.0) - TwoFloat::new_mul(s, s) * 2.0
    } else {
        let gap = (TwoFloat::from(PI) + PI_DD_LO) - d;
        let s = (0.5 * f64::from(gap)).sin();
        TwoFloat::new_mul(s, s) * 2.0 - 1.0
    }
}

/// Sum the series at x = cos d; `with_derivatives` extends truncation so
/// the polynomially growing derivative terms are also converged.
///
/// Accumulation is in double-double arithmetic: at small t the terms are of
/// size 1/t while the sum can be many orders of magnitude smaller.
pub fn legendre_sums(
    x: f64,
    t: f64,
    cfg: &SeriesConfig,
    with_derivatives: bool,
) -> Result<LegendreSums> {
    legendre_sums_dd(TwoFloat::from(x.clamp(-1.0, 1.0)), t, cfg, with_derivatives)
}

fn legendre_sums_dd(
    x: TwoFloat,
    t: f64,
    cfg: &SeriesConfig,
    with_derivatives: bool,
) -> Result<LegendreSums> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("time must be positive, got {t}")));
    }
    let one = TwoFloat::from(1.0);
    let zero = TwoFloat::from(0.0);
    let (mut p_prev, mut p) = (one, x);
    let (mut dp_prev, mut dp) = (zero, one);
    let (mut ddp_prev, mut ddp) = (zero, zero);

    // weights w_l = e^{−l(l+1)t} by w_l = w_{l−1} q^l with q = e^{−2t}
    let q = exp_dd(-2.0 * t);
    let mut q_pow = one;
    let mut w = one;

    let (mut value, mut dx, mut dxx, mut dt) = (one, zero, zero, zero);
    let mut abs_value = 1.0;
    let mut abs_derivs = 0.0;
    let norm = 1.0 / (4.0 * PI);
    let finish = |value: TwoFloat, dx: TwoFloat, dxx: TwoFloat, dt: TwoFloat, abs_value: f64, abs_derivs: f64, terms| {
        let u = one - x * x;
        let lap = u * dxx - x * dx * 2.0;
        LegendreSums {
            value: norm * f64::from(value),
            dx: norm * f64::from(dx),
            dxx: norm * f64::from(dxx),
            dt: norm * f64::from(dt),
            laplacian: norm * f64::from(lap),
            abs_value: norm * abs_value,
            abs_derivs: norm * abs_derivs,
            terms,
        }
    };
    for l in 1..=cfg.max_terms {
        let lf = l as f64;
        let ll = lf * (lf + 1.0);
        q_pow *= q;
        w *= q_pow;
        let c = w * (2.0 * lf + 1.0);
        let cp = c * p;
        value += cp;
        dx += c * dp;
        dxx += c * ddp;
        dt -= cp * ll;
        let c_hi = c.hi();
        abs_value += cp.hi().abs();
        abs_derivs += c_hi * (dp.hi().abs() + ddp.hi().abs());

        let scale = if with_derivatives { (1.0 + ll).powi(2) } else { 1.0 };
        let reference = if with_derivatives { abs_value } else { value.hi().abs() };
        if c_hi * scale < cfg.tol * reference {
            return Ok(finish(value, dx, dxx, dt, abs_value, abs_derivs, l + 1));
        }
        // advance P_l, P_l', P_l'' to l + 1
        let p_next = (x * p * (2.0 * lf + 1.0) - p_prev * lf) / (lf + 1.0);
        let dp_next = dp_prev + p * (2.0 * lf + 1.0);
        let ddp_next = ddp_prev + dp * (2.0 * lf + 1.0);
        p_prev = p;
        p = p_next;
        dp_prev = dp;
        dp = dp_next;
        ddp_prev = ddp;
        ddp = ddp_next;
    }
    Err(Error::precision(format!(
        "sphere Legendre series did not converge within {} terms at t = {t}",
        cfg.max_terms
    )))
}

fn check(d: f64, t: f64, cfg: &SeriesConfig) -> Result<()> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("time must be positive, got {t}")));
    }
    if t < cfg.sphere_t_min {
        return Err(Error::precision(format!(
            "sphere kernel requested at t = {t} below t_min = {}: the Legendre series \
             converges too slowly for small times",
            cfg.sphere_t_min
        )));
    }
    if !(0.0..=PI * (1.0 + 1e-12)).contains(&d) {
        return Err(Error::domain(format!("angle {d} outside [0, π]")));
    }
    Ok(())
}

fn rounding_check(sums: &LegendreSums, d: f64, t: f64) -> Result<()> {
    let err = DD_EPSILON * sums.abs_value;
    if !(sums.value > 0.0) || err > SPHERE_ROUNDING_LIMIT * sums.value {
        return Err(Error::precision(format!(
            "sphere kernel at d = {d}, t = {t} is below the series' rounding floor \
             (estimated relative error {:.1e})",
            err / sums.value.abs()
        )));
    }
    Ok(())
}

pub fn sphere2_kernel(d: f64, t: f64, cfg: &SeriesConfig) -> Result<f64> {
    check(d, t, cfg)?;
    let sums = legendre_sums_dd(cos_dd(d.min(PI)), t, cfg, false)?;
    rounding_check(&sums, d, t)?;
    Ok(sums.value)
}

/// Distance below the antipode inside which derivatives are refused.
pub const CUT_LOCUS_GUARD: f64 = 1e-3;

pub fn sphere2_jet(d: f64, t: f64, cfg: &SeriesConfig) -> Result<RadialJet> {
    check(d, t, cfg)?;
    if d > PI - CUT_LOCUS_GUARD {
        return Err(Error::precision(format!(
            "derivatives at d = {d} are too close to the cut locus d = π"
        )));
    }
    let sums = legendre_sums_dd(cos_dd(d), t, cfg, true)?;
    rounding_check(&sums, d, t)?;
    let deriv_err = DD_EPSILON * sums.abs_derivs;
    let h = sums.value;
    let laplacian_ratio = sums.laplacian / h;
    if deriv_err / h > 1e-10 * (1.0 + laplacian_ratio.abs()) {
        return Err(Error::precision(format!(
            "sphere kernel derivatives at d = {d}, t = {t} lost precision"
        )));
    }
    Ok(RadialJet {
        ln_value: h.ln(),
        dlog_d: -d.sin() * sums.dx / h,
        laplacian_ratio,
        dt_log: sums.dt / h,
    })
}
