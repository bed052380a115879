//! Catalog of model manifolds with non-negative Ricci curvature: flat
//! Euclidean factors, circles, the unit 2-sphere and metric products of
//! these. Every member is homogeneous, so ball volumes do not depend on
//! the centre.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{adaptive_simpson, ln_unit_ball_volume};
use crate::tolerance::QUAD_TOL;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelManifold {
    Euclidean { n: usize },
    Circle { length: f64 },
    /// Unit-radius round sphere, Ric = 1.
    Sphere2,
    Product(Vec<ModelManifold>),
}

/// A point on a catalog manifold, one coordinate block per factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Point {
    Euclidean(Vec<f64>),
    /// Arc-length coordinate in [0, L).
    Circle(f64),
    Sphere2([f64; 3]),
    Product(Vec<Point>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeData {
    pub radius: f64,
    pub volume: f64,
    pub area: f64,
    pub euclidean_volume: f64,
}

/// Volume of the Euclidean ball of radius `r` in ℝⁿ.
pub fn euclidean_ball_volume(n: usize, r: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("Euclidean dimension must be at least 1"));
    }
    if !(r >= 0.0) {
        return Err(Error::domain(format!("radius must be non-negative, got {r}")));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    Ok((ln_unit_ball_volume(n) + n as f64 * r.ln()).exp())
}

impl ModelManifold {
    pub fn euclidean(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("Euclidean dimension must be at least 1"));
        }
        Ok(ModelManifold::Euclidean { n })
    }

    pub fn circle(length: f64) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::domain(format!("circle length must be positive, got {length}")));
        }
        Ok(ModelManifold::Circle { length })
    }

    pub fn sphere2() -> Self {
        ModelManifold::Sphere2
    }

    pub fn product(factors: Vec<ModelManifold>) -> Result<Self> {
        if factors.len() < 2 {
            return Err(Error::domain("a product needs at least two factors"));
        }
        for f in &factors {
            f.validate()?;
        }
        Ok(ModelManifold::Product(factors))
    }

    /// Checks the structural invariants of a manifold built by hand.
    pub fn validate(&self) -> Result<()> {
        match self {
            ModelManifold::Euclidean { n } => Self::euclidean(*n).map(|_| ()),
            ModelManifold::Circle { length } => Self::circle(*length).map(|_| ()),
            ModelManifold::Sphere2 => Ok(()),
            ModelManifold::Product(fs) => {
                if fs.len() < 2 {
                    return Err(Error::domain("a product needs at least two factors"));
                }
                fs.iter().try_for_each(|f| f.validate())
            }
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            ModelManifold::Euclidean { n } => *n,
            ModelManifold::Circle { .. } => 1,
            ModelManifold::Sphere2 => 2,
            ModelManifold::Product(fs) => fs.iter().map(|f| f.dimension()).sum(),
        }
    }

    /// Non-product factors in order, with nested products flattened.
    pub fn simple_factors(&self) -> Vec<&ModelManifold> {
        let mut out = Vec::new();
        self.collect_factors(&mut out);
        out
    }

    fn collect_factors<'a>(&'a self, out: &mut Vec<&'a ModelManifold>) {
        match self {
            ModelManifold::Product(fs) => fs.iter().for_each(|f| f.collect_factors(out)),
            other => out.push(other),
        }
    }

    pub fn is_compact(&self) -> bool {
        self.simple_factors()
            .iter()
            .all(|f| !matches!(f, ModelManifold::Euclidean { .. }))
    }

    pub fn has_compact_factor(&self) -> bool {
        self.simple_factors()
            .iter()
            .any(|f| !matches!(f, ModelManifold::Euclidean { .. }))
    }

    /// Diameter of a compact manifold, `None` otherwise.
    pub fn diameter(&self) -> Option<f64> {
        match self {
            ModelManifold::Euclidean { .. } => None,
            ModelManifold::Circle { length } => Some(0.5 * length),
            ModelManifold::Sphere2 => Some(PI),
            ModelManifold::Product(fs) => {
                let mut sq = 0.0;
                for f in fs {
                    let d = f.diameter()?;
                    sq += d * d;
                }
                Some(sq.sqrt())
            }
        }
    }

    pub fn origin(&self) -> Point {
        match self {
            ModelManifold::Euclidean { n } => Point::Euclidean(vec![0.0; *n]),
            ModelManifold::Circle { .. } => Point::Circle(0.0),
            ModelManifold::Sphere2 => Point::Sphere2([0.0, 0.0, 1.0]),
            ModelManifold::Product(fs) => Point::Product(fs.iter().map(|f| f.origin()).collect()),
        }
    }

    /// A point at geodesic distance `d` from [`origin`](Self::origin).
    ///
    /// On products the displacement is shared equally between factors in
    /// the squared metric; compact factors that cannot absorb their share
    /// are filled to their diameter and the remainder goes to the others.
    pub fn point_at_distance(&self, d: f64) -> Result<Point> {
        if !(d >= 0.0) || !d.is_finite() {
            return Err(Error::domain(format!("distance must be non-negative, got {d}")));
        }
        match self {
            ModelManifold::Euclidean { n } => {
                let mut v = vec![0.0; *n];
                v[0] = d;
                Ok(Point::Euclidean(v))
            }
            ModelManifold::Circle { length } => {
                if d > 0.5 * length * (1.0 + 1e-12) {
                    return Err(Error::usage(format!(
                        "distance {d} exceeds the circle's diameter {}",
                        0.5 * length
                    )));
                }
                Ok(Point::Circle(d.min(0.5 * length)))
            }
            ModelManifold::Sphere2 => {
                if d > PI * (1.0 + 1e-12) {
                    return Err(Error::usage(format!("distance {d} exceeds the sphere's diameter π")));
                }
                let d = d.min(PI);
                Ok(Point::Sphere2([d.sin(), 0.0, d.cos()]))
            }
            ModelManifold::Product(fs) => {
                let shares = split_displacement(fs, d)?;
                let pts = fs
                    .iter()
                    .zip(shares)
                    .map(|(f, s)| f.point_at_distance(s))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Point::Product(pts))
            }
        }
    }

    pub fn validate_point(&self, p: &Point) -> Result<()> {
        match (self, p) {
            (ModelManifold::Euclidean { n }, Point::Euclidean(v)) if v.len() == *n => {
                if v.iter().all(|c| c.is_finite()) {
                    Ok(())
                } else {
                    Err(Error::domain("non-finite Euclidean coordinate"))
                }
            }
            (ModelManifold::Circle { .. }, Point::Circle(c)) if c.is_finite() => Ok(()),
            (ModelManifold::Sphere2, Point::Sphere2(v)) => {
                let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                if (norm - 1.0).abs() <= 1e-12 {
                    Ok(())
                } else {
                    Err(Error::usage(format!("sphere point has norm {norm}, expected 1")))
                }
            }
            (ModelManifold::Product(fs), Point::Product(ps)) if fs.len() == ps.len() => fs
                .iter()
                .zip(ps)
                .try_for_each(|(f, q)| f.validate_point(q)),
            _ => Err(Error::usage(format!(
                "point shape does not match manifold {}",
                self.tag()
            ))),
        }
    }

    /// Geodesic distance between `p` and `q`.
    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        let parts = self.factor_distances(p, q)?;
        if parts.len() == 1 {
            return Ok(parts[0]);
        }
        Ok(parts.iter().map(|x| x * x).sum::<f64>().sqrt())
    }

    /// Per-factor distances, in the order of [`simple_factors`](Self::simple_factors).
    pub fn factor_distances(&self, p: &Point, q: &Point) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        self.push_factor_distances(p, q, &mut out)?;
        Ok(out)
    }

    fn push_factor_distances(&self, p: &Point, q: &Point, out: &mut Vec<f64>) -> Result<()> {
        self.validate_point(p)?;
        self.validate_point(q)?;
        match (self, p, q) {
            (ModelManifold::Euclidean { .. }, Point::Euclidean(a), Point::Euclidean(b)) => {
                out.push(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt());
            }
            (ModelManifold::Circle { length }, Point::Circle(a), Point::Circle(b)) => {
                let delta = (a - b).abs().rem_euclid(*length);
                out.push(delta.min(length - delta));
            }
            (ModelManifold::Sphere2, Point::Sphere2(a), Point::Sphere2(b)) => {
                let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
                let cross = [
                    a[1] * b[2] - a[2] * b[1],
                    a[2] * b[0] - a[0] * b[2],
                    a[0] * b[1] - a[1] * b[0],
                ];
                let cn = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
                // same angle as arccos(p·q), stable near 0 and π
                out.push(cn.atan2(dot));
            }
            (ModelManifold::Product(fs), Point::Product(ps), Point::Product(qs)) => {
                for ((f, a), b) in fs.iter().zip(ps).zip(qs) {
                    f.push_factor_distances(a, b, out)?;
                }
            }
            _ => return Err(Error::usage("point shape does not match manifold")),
        }
        Ok(())
    }

    /// Volume of the geodesic ball B_x(r).
    pub fn ball_volume(&self, x: &Point, r: f64) -> Result<f64> {
        self.ball_volume_tol(x, r, QUAD_TOL)
    }

    pub fn ball_volume_tol(&self, x: &Point, r: f64, tol: f64) -> Result<f64> {
        self.validate_point(x)?;
        if !(r >= 0.0) {
            return Err(Error::domain(format!("radius must be non-negative, got {r}")));
        }
        if let (Some(diam), Some(total)) = (self.diameter(), self.total_volume()) {
            if r >= diam {
                return Ok(total);
            }
        }
        let factors = self.simple_factors();
        Ok(product_volume(&factors, r, tol))
    }

    /// Riemannian volume of a compact manifold.
    pub fn total_volume(&self) -> Option<f64> {
        match self {
            ModelManifold::Euclidean { .. } => None,
            ModelManifold::Circle { length } => Some(*length),
            ModelManifold::Sphere2 => Some(4.0 * PI),
            ModelManifold::Product(fs) => fs.iter().map(|f| f.total_volume()).product(),
        }
    }

    /// Area of the geodesic sphere ∂B_x(r).
    pub fn sphere_area(&self, x: &Point, r: f64) -> Result<f64> {
        self.validate_point(x)?;
        if !(r > 0.0) {
            return Err(Error::domain(format!("radius must be positive, got {r}")));
        }
        if let Some(diam) = self.diameter() {
            if r >= diam {
                return Ok(0.0);
            }
        }
        match self {
            ModelManifold::Product(_) => {
                let h = (1e-6f64).max(1e-6 * r).min(0.5 * r);
                let up = self.ball_volume(x, r + h)?;
                let down = self.ball_volume(x, r - h)?;
                Ok(((up - down) / (2.0 * h)).max(0.0))
            }
            simple => Ok(simple_area(simple, r)),
        }
    }

    pub fn volume_data(&self, x: &Point, r: f64) -> Result<VolumeData> {
        Ok(VolumeData {
            radius: r,
            volume: self.ball_volume(x, r)?,
            area: if r > 0.0 { self.sphere_area(x, r)? } else { 0.0 },
            euclidean_volume: euclidean_ball_volume(self.dimension(), r)?,
        })
    }

    /// Asymptotic volume ratio θ = lim r⁻ⁿ V(r) when positive.
    pub fn mvg_theta(&self) -> Option<f64> {
        if self.has_compact_factor() {
            None
        } else {
            Some(ln_unit_ball_volume(self.dimension()).exp())
        }
    }

    /// Large-radius growth V(r) ~ C·r^τ, returned as (τ, C).
    ///
    /// τ is the total Euclidean dimension and C = ω_τ times the volume of
    /// the compact part.
    pub fn volume_growth(&self) -> (usize, f64) {
        let mut tau = 0;
        let mut compact_volume = 1.0;
        for f in self.simple_factors() {
            match f {
                ModelManifold::Euclidean { n } => tau += n,
                ModelManifold::Circle { length } => compact_volume *= length,
                ModelManifold::Sphere2 => compact_volume *= 4.0 * PI,
                ModelManifold::Product(_) => unreachable!("flattened"),
            }
        }
        let omega = if tau == 0 { 1.0 } else { ln_unit_ball_volume(tau).exp() };
        (tau, omega * compact_volume)
    }

    /// Canonical spec string, e.g. `prod:rn:n=1+circle:L=6.283185307179586`.
    pub fn tag(&self) -> String {
        match self {
            ModelManifold::Euclidean { n } => format!("rn:n={n}"),
            ModelManifold::Circle { length } => format!("circle:L={length}"),
            ModelManifold::Sphere2 => "s2".to_string(),
            ModelManifold::Product(fs) => {
                let inner: Vec<String> = fs.iter().map(|f| f.tag()).collect();
                format!("prod:{}", inner.join("+"))
            }
        }
    }
}

impl fmt::Display for ModelManifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

impl FromStr for ModelManifold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("prod:") {
            let factors = rest
                .split('+')
                .map(parse_simple)
                .collect::<Result<Vec<_>>>()?;
            return ModelManifold::product(factors);
        }
        parse_simple(s)
    }
}

fn parse_simple(s: &str) -> Result<ModelManifold> {
    let bad = || Error::usage(format!("unknown manifold spec '{s}'"));
    let s = s.trim();
    if s == "s2" {
        return Ok(ModelManifold::Sphere2);
    }
    let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
    let (key, value) = arg.split_once('=').ok_or_else(bad)?;
    match (kind, key) {
        ("rn", "n") => {
            let n: usize = value.parse().map_err(|_| bad())?;
            ModelManifold::euclidean(n).map_err(|e| Error::usage(e.to_string()))
        }
        ("circle", "L") => {
            let l: f64 = value.parse().map_err(|_| bad())?;
            ModelManifold::circle(l).map_err(|e| Error::usage(e.to_string()))
        }
        _ => Err(bad()),
    }
}

fn split_displacement(factors: &[ModelManifold], d: f64) -> Result<Vec<f64>> {
    let mut shares = vec![None; factors.len()];
    let mut remaining_sq = d * d;
    loop {
        let free: Vec<usize> = (0..factors.len()).filter(|&i| shares[i].is_none()).collect();
        if free.is_empty() {
            if remaining_sq > 1e-24 * d * d.max(1.0) {
                return Err(Error::usage(format!(
                    "distance {d} exceeds the diameter of the product"
                )));
            }
            break;
        }
        let share = (remaining_sq.max(0.0) / free.len() as f64).sqrt();
        let mut capped = false;
        for &i in &free {
            if let Some(diam) = factors[i].diameter() {
                if diam < share {
                    shares[i] = Some(diam);
                    remaining_sq -= diam * diam;
                    capped = true;
                }
            }
        }
        if !capped {
            for &i in &free {
                shares[i] = Some(share);
            }
            break;
        }
    }
    Ok(shares.into_iter().map(|s| s.unwrap_or(0.0)).collect())
}

fn simple_volume(m: &ModelManifold, r: f64) -> f64 {
    match m {
        ModelManifold::Euclidean { n } => euclidean_ball_volume(*n, r).unwrap_or(0.0),
        ModelManifold::Circle { length } => (2.0 * r).min(*length),
        ModelManifold::Sphere2 => {
            let half = 0.5 * r.min(PI);
            4.0 * PI * half.sin().powi(2)
        }
        ModelManifold::Product(_) => unreachable!("flattened"),
    }
}

fn simple_area(m: &ModelManifold, r: f64) -> f64 {
    match m {
        ModelManifold::Euclidean { n } => {
            if *n == 1 {
                2.0
            } else {
                *n as f64 * (ln_unit_ball_volume(*n) + (*n as f64 - 1.0) * r.ln()).exp()
            }
        }
        ModelManifold::Circle { length } => {
            if r < 0.5 * length {
                2.0
            } else {
                0.0
            }
        }
        ModelManifold::Sphere2 => {
            if r < PI {
                2.0 * PI * r.sin()
            } else {
                0.0
            }
        }
        ModelManifold::Product(_) => unreachable!("flattened"),
    }
}

fn simple_breakpoint(m: &ModelManifold) -> Option<f64> {
    match m {
        ModelManifold::Circle { length } => Some(0.5 * length),
        ModelManifold::Sphere2 => Some(PI),
        _ => None,
    }
}

/// Radii at which the ball volume of a product of `factors` fails to be smooth.
fn product_breakpoints(factors: &[&ModelManifold]) -> Vec<f64> {
    let bs: Vec<f64> = factors.iter().filter_map(|f| simple_breakpoint(f)).collect();
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << bs.len()) {
        let sq: f64 = bs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, b)| b * b)
            .sum();
        out.push(sq.sqrt());
    }
    out
}

/// V(r) = ∫₀^{π/2} A₁(r sin θ) V_rest(r cos θ) r cos θ dθ, the slice
/// integral in polar form, split at every non-smooth angle.
fn product_volume(factors: &[&ModelManifold], r: f64, tol: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    if factors.len() == 1 {
        return simple_volume(factors[0], r);
    }
    let first = factors[0];
    let rest = &factors[1..];
    let mut cuts = vec![0.0, 0.5 * PI];
    if let Some(b) = simple_breakpoint(first) {
        if b < r {
            cuts.push((b / r).asin());
        }
    }
    for b in product_breakpoints(rest) {
        if b < r {
            cuts.push((b / r).acos());
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let inner_tol = 0.1 * tol;
    let integrand = |theta: f64| {
        let (s, c) = theta.sin_cos();
        let rc = r * c;
        if rc <= 0.0 {
            return 0.0;
        }
        simple_area(first, r * s) * product_volume(rest, rc, inner_tol) * rc
    };
    cuts.windows(2)
        .map(|w| adaptive_simpson(integrand, w[0], w[1], tol))
        .sum()
}
