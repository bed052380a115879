//! The classical inequalities for positive solutions of the heat equation,
//! evaluated on reference kernels u(x, t) = H(p, x, t).

use std::f64::consts::PI;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ModelManifold, Point};
use crate::kernels::{kernel_derivatives, log_heat_kernel, SeriesConfig, CUT_LOCUS_GUARD};
use crate::special::{gauss_legendre, linspace, logspace};
use crate::tolerance::INEQUALITY_SLACK;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassicalCheck {
    LiYauGradient,
    Harnack,
    MeanValue,
    CheegerYau,
    DaviesIntegral,
    HamiltonGradient,
    HamiltonLaplacian,
}

impl ClassicalCheck {
    pub const ALL: [ClassicalCheck; 7] = [
        ClassicalCheck::LiYauGradient,
        ClassicalCheck::Harnack,
        ClassicalCheck::MeanValue,
        ClassicalCheck::CheegerYau,
        ClassicalCheck::DaviesIntegral,
        ClassicalCheck::HamiltonGradient,
        ClassicalCheck::HamiltonLaplacian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassicalCheck::LiYauGradient => "li_yau_gradient",
            ClassicalCheck::Harnack => "harnack",
            ClassicalCheck::MeanValue => "mean_value",
            ClassicalCheck::CheegerYau => "cheeger_yau",
            ClassicalCheck::DaviesIntegral => "davies_integral",
            ClassicalCheck::HamiltonGradient => "hamilton_gradient",
            ClassicalCheck::HamiltonLaplacian => "hamilton_laplacian",
        }
    }

    /// Margins are differences of logarithms rather than of dimensionless sides.
    pub fn log_scale(self) -> bool {
        matches!(
            self,
            ClassicalCheck::Harnack
                | ClassicalCheck::MeanValue
                | ClassicalCheck::CheegerYau
                | ClassicalCheck::DaviesIntegral
        )
    }
}

impl std::fmt::Display for ClassicalCheck {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassicalCheck {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassicalCheck::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::usage(format!("unknown classical inequality '{s}'")))
    }
}

/// Grid and numerical settings shared by the checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalParams {
    /// distances of the evaluation points from the pole p
    pub distances: Vec<f64>,
    pub times: Vec<f64>,
    /// t₂/t₁ for the two-time inequalities
    pub time_ratios: Vec<f64>,
    /// ball radii for the mean value inequality, in units of √t₁
    pub radius_scales: Vec<f64>,
    /// pairs of intervals (arcs) for the integral bound
    pub sets: Vec<((f64, f64), (f64, f64))>,
    /// initial time shift of the bounded solution in the Hamilton checks
    pub bootstrap_time: f64,
    /// spatial samples used for the supremum A
    pub sup_samples: usize,
    pub quadrature_nodes: usize,
    pub quadrature_panels: usize,
    pub series: SeriesConfig,
    pub slack: f64,
}

impl ClassicalParams {
    pub fn default_for(m: &ModelManifold) -> Self {
        let dmax = match m.diameter() {
            Some(diam) => (0.95 * diam).min(3.0),
            None => 3.0,
        };
        Self {
            distances: linspace(0.0, dmax, 7),
            times: logspace(0.02, 20.0, 7),
            time_ratios: vec![1.5, 4.0],
            radius_scales: vec![0.5, 1.0, 2.0],
            sets: vec![
                ((0.0, 0.5), (PI, PI + 0.5)),
                ((0.0, 1.0), (1.5, 2.5)),
                ((0.0, 1.0), (0.5, 2.0)),
                ((-0.5, 0.5), (-0.5, 0.5)),
            ],
            bootstrap_time: 0.05,
            sup_samples: 2001,
            quadrature_nodes: 16,
            quadrature_panels: 8,
            series: SeriesConfig::default(),
            slack: INEQUALITY_SLACK,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalRecord {
    /// distance d(p, x), or d(B₁, B₂) for the integral bound
    pub d: f64,
    pub t: f64,
    /// second time, ball radius or second distance, depending on the check
    pub param: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalReport {
    pub check: ClassicalCheck,
    pub manifold: String,
    /// false when the check has no implementation on this manifold
    pub applicable: bool,
    pub records: Vec<ClassicalRecord>,
    /// points refused by the kernels (precision)
    pub skipped: usize,
    pub worst: Option<ClassicalRecord>,
    pub pass: bool,
}

impl ClassicalReport {
    pub fn worst_margin(&self) -> Option<f64> {
        self.worst.as_ref().map(|r| r.margin)
    }
}

/// Evaluate one classical inequality over the grid in `params`.
pub fn check_classical(
    check: ClassicalCheck,
    m: &ModelManifold,
    params: &ClassicalParams,
) -> Result<ClassicalReport> {
    m.validate()?;
    let mut acc = Acc::default();
    let applicable = match check {
        ClassicalCheck::LiYauGradient => li_yau_gradient(m, params, &mut acc)?,
        ClassicalCheck::Harnack => harnack(m, params, &mut acc)?,
        ClassicalCheck::MeanValue => mean_value(m, params, &mut acc)?,
        ClassicalCheck::CheegerYau => cheeger_yau(m, params, &mut acc)?,
        ClassicalCheck::DaviesIntegral => davies(m, params, &mut acc)?,
        ClassicalCheck::HamiltonGradient => hamilton(m, params, false, &mut acc)?,
        ClassicalCheck::HamiltonLaplacian => hamilton(m, params, true, &mut acc)?,
    };
    let worst = acc
        .records
        .iter()
        .fold(None::<&ClassicalRecord>, |w, r| match w {
            Some(w) if w.margin <= r.margin => Some(w),
            _ => Some(r),
        })
        .cloned();
    let pass = worst.as_ref().map_or(true, |w| w.margin >= -params.slack);
    Ok(ClassicalReport {
        check,
        manifold: m.tag(),
        applicable,
        records: acc.records,
        skipped: acc.skipped,
        worst,
        pass,
    })
}

#[derive(Default)]
struct Acc {
    records: Vec<ClassicalRecord>,
    skipped: usize,
}

impl Acc {
    /// Record `value`, counting precision refusals as skipped and passing
    /// any other error up.
    fn take<T>(&mut self, value: Result<T>) -> Result<Option<T>> {
        match value {
            Ok(v) => Ok(Some(v)),
            Err(e) if e.is_precision() => {
                self.skipped += 1;
                Ok(None)
            }
            Err(e) => Err(e),
        }
    }
}

/// Points away from the sphere's cut locus, where derivatives are defined.
fn derivative_distances(m: &ModelManifold, ds: &[f64]) -> Vec<f64> {
    let has_sphere = m.simple_factors().iter().any(|f| matches!(f, ModelManifold::Sphere2));
    ds.iter()
        .copied()
        .filter(|&d| !has_sphere || d < PI - CUT_LOCUS_GUARD)
        .collect()
}

fn li_yau_gradient(m: &ModelManifold, p: &ClassicalParams, acc: &mut Acc) -> Result<bool> {
    let n = m.dimension() as f64;
    let pole = m.origin();
    for d in derivative_distances(m, &p.distances) {
        let x = m.point_at_distance(d)?;
        for &t in &p.times {
            let Some(k) = acc.take(kernel_derivatives(m, &pole, &x, t, &p.series))? else {
                continue;
            };
            // t(|∇u|²/u² − u_t/u) ≤ n/2
            let lhs = t * k.grad_log_sq - t * k.dt_log;
            let rhs = 0.5 * n;
            acc.records.push(ClassicalRecord { d, t, param: None, lhs, rhs, margin: rhs - lhs });
        }
    }
    Ok(true)
}

fn harnack(m: &ModelManifold, p: &ClassicalParams, acc: &mut Acc) -> Result<bool> {
    let n = m.dimension() as f64;
    let pole = m.origin();
    for &a in &p.distances {
        let x = m.point_at_distance(a)?;
        for &b in &p.distances {
            let y = m.point_at_distance(b)?;
            let dxy = m.distance(&x, &y)?;
            for &t1 in &p.times {
                for &ratio in &p.time_ratios {
                    let t2 = ratio * t1;
                    let Some(u1) = acc.take(log_heat_kernel(m, &pole, &x, t1, &p.series))? else {
                        continue;
                    };
                    let Some(u2) = acc.take(log_heat_kernel(m, &pole, &y, t2, &p.series))? else {
                        continue;
                    };
                    let rhs = u2 + 0.5 * n * ratio.ln() + dxy * dxy / (4.0 * (t2 - t1));
                    acc.records.push(ClassicalRecord {
                        d: a,
                        t: t1,
                        param: Some(t2),
                        lhs: u1,
                        rhs,
                        margin: rhs - u1,
                    });
                }
            }
        }
    }
    Ok(true)
}

fn cheeger_yau(m: &ModelManifold, p: &ClassicalParams, acc: &mut Acc) -> Result<bool> {
    let n = m.dimension() as f64;
    let pole = m.origin();
    for &d in &p.distances {
        let x = m.point_at_distance(d)?;
        for &t in &p.times {
            let Some(lh) = acc.take(log_heat_kernel(m, &pole, &x, t, &p.series))? else {
                continue;
            };
            let gauss = -0.5 * n * (4.0 * PI * t).ln() - d * d / (4.0 * t);
            acc.records.push(ClassicalRecord { d, t, param: None, lhs: lh, rhs: gauss, margin: lh - gauss });
        }
    }
    Ok(true)
}

/// Shift every coordinate of a point on a flat manifold built from ℝᵏ and
/// circle factors; `None` for anything curved.
fn offset_flat(m: &ModelManifold, x: &Point, dx: &[f64]) -> Option<Point> {
    fn go(m: &ModelManifold, x: &Point, dx: &[f64], at: &mut usize) -> Option<Point> {
        match (m, x) {
            (ModelManifold::Euclidean { n }, Point::Euclidean(v)) => {
                let out = v.iter().zip(&dx[*at..*at + n]).map(|(a, b)| a + b).collect();
                *at += n;
                Some(Point::Euclidean(out))
            }
            (ModelManifold::Circle { length }, Point::Circle(c)) => {
                let out = (c + dx[*at]).rem_euclid(*length);
                *at += 1;
                Some(Point::Circle(out))
            }
            (ModelManifold::Product(fs), Point::Product(ps)) => {
                let parts = fs.iter().zip(ps).map(|(f, q)| go(f, q, dx, at)).collect::<Option<Vec<_>>>()?;
                Some(Point::Product(parts))
            }
            _ => None,
        }
    }
    let mut at = 0;
    go(m, x, dx, &mut at)
}

fn is_flat(m: &ModelManifold) -> bool {
    m.simple_factors().iter().all(|f| !matches!(f, ModelManifold::Sphere2))
}

/// Largest radius for which the flat exponential map from a point is injective.
fn flat_injectivity(m: &ModelManifold) -> f64 {
    m.simple_factors()
        .iter()
        .filter_map(|f| match f {
            ModelManifold::Circle { length } => Some(0.5 * length),
            _ => None,
        })
        .fold(f64::INFINITY, f64::min)
}

/// ln of the average of H(pole, ·, t) over B_x(R).
fn ln_ball_average(
    m: &ModelManifold,
    pole: &Point,
    x: &Point,
    r: f64,
    t: f64,
    p: &ClassicalParams,
) -> Result<Option<f64>> {
    let rule = gauss_legendre(p.quadrature_nodes);
    let (nodes, weights) = &rule;
    let panels = p.quadrature_panels;
    let mut eval_err = None;
    let mut h = |q: &Point| match log_heat_kernel(m, pole, q, t, &p.series) {
        Ok(v) => v.exp(),
        Err(e) => {
            eval_err.get_or_insert(e);
            0.0
        }
    };
    let radial = |r_hi: f64, f: &mut dyn FnMut(f64) -> f64| -> f64 {
        let width = r_hi / panels as f64;
        let mut total = 0.0;
        for k in 0..panels {
            let mid = (k as f64 + 0.5) * width;
            for (z, w) in nodes.iter().zip(weights) {
                total += w * 0.5 * width * f(mid + 0.5 * width * z);
            }
        }
        total
    };
    let dim = m.dimension();
    let angles = 4 * p.quadrature_nodes;
    let (integral, volume) = if dim == 1 && is_flat(m) {
        // past half the circumference the two rays already cover the circle
        let r = r.min(flat_injectivity(m));
        let mut f = |s: f64| h(&offset_flat(m, x, &[s]).unwrap()) + h(&offset_flat(m, x, &[-s]).unwrap());
        (radial(r, &mut f), m.ball_volume(x, r)?)
    } else if dim == 2 && is_flat(m) {
        if r > flat_injectivity(m) {
            return Ok(None);
        }
        let mut f = |s: f64| {
            let mut ring = 0.0;
            for k in 0..angles {
                let phi = 2.0 * PI * k as f64 / angles as f64;
                ring += h(&offset_flat(m, x, &[s * phi.cos(), s * phi.sin()]).unwrap());
            }
            ring * 2.0 * PI / angles as f64 * s
        };
        (radial(r, &mut f), m.ball_volume(x, r)?)
    } else if matches!(m, ModelManifold::Sphere2) {
        let Point::Sphere2(c) = x else { unreachable!() };
        let r = r.min(PI);
        // orthonormal tangent frame at x (x lies in the x–z plane)
        let e1 = [c[2], 0.0, -c[0]];
        let e2 = [0.0, 1.0, 0.0];
        let mut f = |s: f64| {
            let mut ring = 0.0;
            for k in 0..angles {
                let phi = 2.0 * PI * k as f64 / angles as f64;
                let (cp, sp) = (phi.cos(), phi.sin());
                let mut q = [0.0; 3];
                for i in 0..3 {
                    q[i] = s.cos() * c[i] + s.sin() * (cp * e1[i] + sp * e2[i]);
                }
                let norm = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt();
                ring += h(&Point::Sphere2([q[0] / norm, q[1] / norm, q[2] / norm]));
            }
            ring * 2.0 * PI / angles as f64 * s.sin()
        };
        (radial(r, &mut f), m.ball_volume(x, r)?)
    } else {
        return Err(Error::usage("mean value quadrature needs a 1-D or 2-D model"));
    };
    if let Some(e) = eval_err {
        return Err(e);
    }
    Ok(Some((integral / volume).ln()))
}

fn mean_value_supported(m: &ModelManifold) -> bool {
    let dim = m.dimension();
    (is_flat(m) && (dim == 1 || dim == 2)) || matches!(m, ModelManifold::Sphere2)
}

fn mean_value(m: &ModelManifold, p: &ClassicalParams, acc: &mut Acc) -> Result<bool> {
    if !mean_value_supported(m) {
        return Ok(false);
    }
    let n = m.dimension() as f64;
    let pole = m.origin();
    for &a in &p.distances {
        let x = m.point_at_distance(a)?;
        for &t1 in &p.times {
            let Some(u1) = acc.take(log_heat_kernel(m, &pole, &x, t1, &p.series))? else {
                continue;
            };
            for &ratio in &p.time_ratios {
                let t2 = ratio * t1;
                for &scale in &p.radius_scales {
                    let r = scale * t1.sqrt();
                    let Some(avg) = acc.take(ln_ball_average(m, &pole, &x, r, t2, p))? else {
                        continue;
                    };
                    let Some(avg) = avg else { continue };
                    let rhs = avg + 0.5 * n * ratio.ln() + r * r / (4.0 * (t2 - t1));
                    acc.records.push(ClassicalRecord {
                        d: a,
                        t: t1,
                        param: Some(r),
                        lhs: u1,
                        rhs,
                        margin: rhs - u1,
                    });
                }
            }
        }
    }
    Ok(true)
}

/// Distance between two intervals of ℝ or two arcs of a circle.
fn set_distance(length: Option<f64>, a: (f64, f64), b: (f64, f64)) -> f64 {
    match length {
        None => (b.0 - a.1).max(a.0 - b.1).max(0.0),
        Some(l) => {
            let inside = |x: f64, s: (f64, f64)| (x - s.0).rem_euclid(l) <= s.1 - s.0;
            if inside(a.0, b) || inside(b.0, a) {
                return 0.0;
            }
            let arc = |x: f64, y: f64| {
                let d = (x - y).abs().rem_euclid(l);
                d.min(l - d)
            };
            [arc(a.0, b.0), arc(a.0, b.1), arc(a.1, b.0), arc(a.1, b.1)]
                .into_iter()
                .fold(f64::INFINITY, f64::min)
        }
    }
}

fn davies(m: &ModelManifold, p: &ClassicalParams, acc: &mut Acc) -> Result<bool> {
    let length = match m {
        ModelManifold::Euclidean { n: 1 } => None,
        ModelManifold::Circle { length } => Some(*length),
        _ => return Ok(false),
    };
    let rule = gauss_legendre(p.quadrature_nodes);
    let panels = p.quadrature_panels;
    let abscissae = |s: (f64, f64)| -> Vec<(f64, f64)> {
        let width = (s.1 - s.0) / panels as f64;
        let mut out = Vec::with_capacity(panels * rule.0.len());
        for k in 0..panels {
            let mid = s.0 + (k as f64 + 0.5) * width;
            for (z, w) in rule.0.iter().zip(&rule.1) {
                out.push((mid + 0.5 * width * z, 0.5 * width * w));
            }
        }
        out
    };
    for &(b1, b2) in &p.sets {
        if let Some(l) = length {
            if b1.1 - b1.0 >= l || b2.1 - b2.0 >= l {
                return Err(Error::usage("arc longer than the circle"));
            }
        }
        let xs = abscissae(b1);
        let ys = abscissae(b2);
        let dist = set_distance(length, b1, b2);
        let (v1, v2) = (b1.1 - b1.0, b2.1 - b2.0);
        for &t in &p.times {
            let mut total = 0.0;
            let mut refused = None;
            for &(x, wx) in &xs {
                for &(y, wy) in &ys {
                    let (px, py) = match length {
                        None => (Point::Euclidean(vec![x]), Point::Euclidean(vec![y])),
                        Some(l) => (Point::Circle(x.rem_euclid(l)), Point::Circle(y.rem_euclid(l))),
                    };
                    match log_heat_kernel(m, &px, &py, t, &p.series) {
                        Ok(v) => total += wx * wy * v.exp(),
                        Err(e) => {
                            refused = Some(e);
                            break;
                        }
                    }
                }
                if refused.is_some() {
                    break;
                }
            }
            if let Some(e) = refused {
                acc.take::<()>(Err(e))?;
                continue;
            }
            let lhs = total.ln();
            let rhs = 0.5 * (v1 * v2).ln() - dist * dist / (4.0 * t);
            acc.records.push(ClassicalRecord { d: dist, t, param: None, lhs, rhs, margin: rhs - lhs });
        }
    }
    Ok(true)
}

fn hamilton(m: &ModelManifold, p: &ClassicalParams, laplacian: bool, acc: &mut Acc) -> Result<bool> {
    let n = m.dimension() as f64;
    let pole = m.origin();
    let t0 = p.bootstrap_time;
    // sup of u(·, 0) = H(p, ·, t₀) on a dense set of distances
    let reach = match m.diameter() {
        Some(diam) => diam,
        None => 10.0 * t0.sqrt() + p.distances.iter().copied().fold(0.0, f64::max),
    };
    let mut ln_sup = f64::NEG_INFINITY;
    for d in linspace(0.0, reach, p.sup_samples) {
        let q = m.point_at_distance(d)?;
        // refusals come from the far tail, well below the maximum
        match log_heat_kernel(m, &pole, &q, t0, &p.series) {
            Ok(v) => ln_sup = ln_sup.max(v),
            Err(e) if e.is_precision() => {}
            Err(e) => return Err(e),
        }
    }
    let ln_a = ln_sup + 1e-6f64.ln_1p();
    for d in derivative_distances(m, &p.distances) {
        let x = m.point_at_distance(d)?;
        for &s in &p.times {
            let Some(k) = acc.take(kernel_derivatives(m, &pole, &x, s + t0, &p.series))? else {
                continue;
            };
            let ln_ratio = ln_a - k.ln_value;
            let (lhs, rhs) = if laplacian {
                (s * k.laplacian_ratio, n + 4.0 * ln_ratio)
            } else {
                (s * k.grad_log_sq, ln_ratio)
            };
            acc.records.push(ClassicalRecord { d, t: s, param: Some(t0), lhs, rhs, margin: rhs - lhs });
        }
    }
    Ok(true)
}
