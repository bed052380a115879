//! Kernel and volume checks against quadrature, finite differences and
//! brute-force measures computed here.

use std::f64::consts::PI;

use heatbound::bounds::{li_yau_bounds, optimize_delta, LiYauConstants, OptimizeSide};
use heatbound::kernels::{
    circle_kernel, circle_kernel_image, circle_kernel_spectral, kernel_derivatives, log_heat_kernel,
    sphere2_kernel, SeriesConfig,
};
use heatbound::special::{gauss_legendre, linspace, logspace};
use heatbound::{ModelManifold, Point};

const L: f64 = 2.0 * PI;

fn cfg() -> SeriesConfig {
    SeriesConfig::default()
}

/// Composite Gauss–Legendre on [a, b].
fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let (z, w) = gauss_legendre(20);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (zi, wi) in z.iter().zip(&w) {
            total += 0.5 * h * wi * f(lo + 0.5 * h * (zi + 1.0));
        }
    }
    total
}

fn arc(s: f64) -> f64 {
    let s = s.rem_euclid(L);
    s.min(L - s)
}

#[test]
fn circle_series_agree_across_time_scales() {
    let mut worst: f64 = 0.0;
    for &t in &logspace(1e-3, 1e3, 61) {
        // distances where H is within four decades of its peak; further out
        // the Fourier series sits below its rounding floor and is refused
        let dmax = (4.0 * t * 4.0 * std::f64::consts::LN_10).sqrt().min(PI);
        for &d in &linspace(0.0, dmax, 11) {
            let a = circle_kernel_image(L, d, t, &cfg()).unwrap();
            let b = circle_kernel_spectral(L, d, t, &cfg()).unwrap();
            worst = worst.max((a / b - 1.0).abs());
        }
    }
    assert!(worst <= 1e-10, "{worst:e}");
}

#[test]
fn circle_kernel_has_unit_mass_and_semigroup_property() {
    for &t in &[0.01, 0.3, 2.0, 20.0] {
        let mass = integrate(|s| circle_kernel(L, arc(s), t, &cfg()).unwrap(), 0.0, L, 64);
        assert!((mass - 1.0).abs() <= 1e-12, "t={t}: {mass}");
    }
    for &(s, t, d) in &[(0.2, 0.3, 1.0), (0.05, 1.5, 2.5), (1.0, 4.0, PI)] {
        let conv = integrate(
            |z| circle_kernel(L, arc(z), s, &cfg()).unwrap() * circle_kernel(L, arc(d - z), t, &cfg()).unwrap(),
            0.0,
            L,
            128,
        );
        let direct = circle_kernel(L, d, s + t, &cfg()).unwrap();
        assert!((conv / direct - 1.0).abs() <= 1e-10, "{conv} vs {direct}");
    }
}

#[test]
fn sphere_kernel_semigroup_property() {
    // ∫ H(x,z,s) H(z,y,t) dA(z), with x the pole and y at angle d
    let cfg = cfg();
    for &(s, t, d) in &[(0.2f64, 0.3f64, 1.0f64), (0.5, 0.5, 2.0)] {
        let h = |ang: f64, tt: f64| sphere2_kernel(ang.clamp(0.0, PI), tt, &cfg).unwrap_or(0.0);
        let conv = integrate(
            |th| {
                th.sin()
                    * integrate(
                        |ph| {
                            let c = th.cos() * d.cos() + th.sin() * d.sin() * ph.cos();
                            h(th, s) * h(c.clamp(-1.0, 1.0).acos(), t)
                        },
                        0.0,
                        2.0 * PI,
                        8,
                    )
            },
            0.0,
            PI,
            16,
        );
        let direct = sphere2_kernel(d, s + t, &cfg).unwrap();
        assert!((conv / direct - 1.0).abs() <= 1e-9, "{conv} vs {direct}");
    }
}

fn radial_fd(m: &ModelManifold, d: f64, t: f64) -> (f64, f64, f64) {
    let x = m.origin();
    let ln = |d: f64, t: f64| log_heat_kernel(m, &x, &m.point_at_distance(d).unwrap(), t, &cfg()).unwrap();
    let h = 1e-4;
    let (lm, l0, lp) = (ln(d - h, t), ln(d, t), ln(d + h, t));
    let first = (lp - lm) / (2.0 * h);
    let second = (lp - 2.0 * l0 + lm) / (h * h);
    let ht = 1e-4 * t;
    let dt = (ln(d, t + ht) - ln(d, t - ht)) / (2.0 * ht);
    (first, second, dt)
}

#[test]
fn derivatives_match_finite_differences() {
    // radial Laplacian: u'' + (n−1)/d u' flat, u'' + cot d u' on the sphere;
    // in log form ΔH/H = ℓ'' + ℓ'² + (mean curvature) ℓ'
    let cases: Vec<(ModelManifold, Box<dyn Fn(f64) -> f64>)> = vec![
        (ModelManifold::euclidean(3).unwrap(), Box::new(|d: f64| 2.0 / d)),
        (ModelManifold::circle(L).unwrap(), Box::new(|_| 0.0)),
        (ModelManifold::sphere2(), Box::new(|d: f64| d.cos() / d.sin())),
    ];
    for (m, mean_curv) in &cases {
        for &(d, t) in &[(1.0, 0.5), (0.4, 0.1), (2.0, 1.7)] {
            let x = m.origin();
            let y = m.point_at_distance(d).unwrap();
            let k = kernel_derivatives(m, &x, &y, t, &cfg()).unwrap();
            let (l1, l2, dt) = radial_fd(m, d, t);
            let lap = l2 + l1 * l1 + mean_curv(d) * l1;
            assert!((k.grad_log_sq.sqrt() - l1.abs()).abs() <= 1e-6 * (1.0 + l1.abs()), "{m} grad at {d},{t}");
            assert!((k.laplacian_ratio - lap).abs() <= 1e-4 * (1.0 + lap.abs()), "{m} Δ at {d},{t}: {} vs {lap}", k.laplacian_ratio);
            assert!((k.dt_log - dt).abs() <= 1e-6 * (1.0 + dt.abs()), "{m} ∂t at {d},{t}: {} vs {dt}", k.dt_log);
            // the kernel solves the heat equation
            assert!((k.dt_log - k.laplacian_ratio).abs() <= 1e-9 * (1.0 + dt.abs()), "{m} heat equation at {d},{t}");
        }
    }
}

#[test]
fn product_derivatives_combine_factors() {
    let m: ModelManifold = "prod:rn:n=1+s2".parse().unwrap();
    let x = m.origin();
    let y = Point::Product(vec![Point::Euclidean(vec![0.7]), ModelManifold::sphere2().point_at_distance(1.2).unwrap()]);
    let t = 0.4;
    let k = kernel_derivatives(&m, &x, &y, t, &cfg()).unwrap();
    let a = kernel_derivatives(&ModelManifold::euclidean(1).unwrap(), &Point::Euclidean(vec![0.0]), &Point::Euclidean(vec![0.7]), t, &cfg()).unwrap();
    let s2 = ModelManifold::sphere2();
    let b = kernel_derivatives(&s2, &s2.origin(), &s2.point_at_distance(1.2).unwrap(), t, &cfg()).unwrap();
    assert!((k.ln_value - a.ln_value - b.ln_value).abs() <= 1e-13);
    assert!((k.grad_log_sq - a.grad_log_sq - b.grad_log_sq).abs() <= 1e-12);
    assert!((k.laplacian_ratio - a.laplacian_ratio - b.laplacian_ratio).abs() <= 1e-12);
}

/// Row-wise measure of {q : dist(x, q) < r} on ℝ¹ × S¹ or S¹ × S¹, rows
/// along the circle; each row contributes the exact length of its chord,
/// capped by the circumference when the other factor is a circle too.
fn brute_force_area(other_is_circle: bool, r: f64) -> f64 {
    let rows = 40_000;
    let h = L / rows as f64;
    let mut area = 0.0;
    for i in 0..rows {
        let s = arc((i as f64 + 0.5) * h);
        let rem = r * r - s * s;
        if rem <= 0.0 {
            continue;
        }
        let half = rem.sqrt();
        area += h * 2.0 * if other_is_circle { half.min(PI) } else { half };
    }
    area
}

#[test]
fn product_ball_volume_matches_grid_measure() {
    for (spec, torus) in [
        ("prod:rn:n=1+circle:L=6.283185307179586", false),
        ("prod:circle:L=6.283185307179586+circle:L=6.283185307179586", true),
    ] {
        let m: ModelManifold = spec.parse().unwrap();
        let x = m.origin();
        for &r in &linspace(0.3, 4.3, 10) {
            let v = m.ball_volume(&x, r).unwrap();
            let b = brute_force_area(torus, r);
            assert!((v / b - 1.0).abs() <= 1e-4, "{spec} r={r}: {v} vs {b}");
        }
    }
}

#[test]
fn sharper_than_li_yau_at_large_distance() {
    // log gap upper/lower, optimised δ versus Li–Yau at any fixed admissible constants
    let m = ModelManifold::euclidean(2).unwrap();
    let x = m.origin();
    let t: f64 = 1.0;
    for &rho in &[10.0, 100.0, 1000.0] {
        let d = (4.0 * rho * t).sqrt();
        let y = m.point_at_distance(d).unwrap();
        let lo = optimize_delta(&m, &x, &y, t, OptimizeSide::Lower).unwrap();
        let up = optimize_delta(&m, &x, &y, t, OptimizeSide::Upper).unwrap();
        let gap = up.bound.ln_value - lo.bound.ln_value;
        for &(c1, c2, delta) in &[(1.0, 1.0, 0.1), (1.0, 1.0, 0.5), (2.0, 3.0, 0.9)] {
            let (a, b) = li_yau_bounds(&m, &x, &y, t, &LiYauConstants::new(c1, c2, delta).unwrap()).unwrap();
            let ly_gap = b.ln_value - a.ln_value;
            assert!(gap < ly_gap, "ρ={rho}: {gap} vs Li–Yau {ly_gap} ({c1},{c2},{delta})");
        }
    }
}
