use std::f64::consts::PI;

use proptest::prelude::*;

use heatbound::bounds::{f_factor, lower_bound, r_delta, t_lower, t_upper, upper_bound};
use heatbound::geometry::euclidean_ball_volume;
use heatbound::kernels::{log_heat_kernel, SeriesConfig};
use heatbound::verify::default_catalog;
use heatbound::{ModelManifold, Point};

fn catalog_index() -> impl Strategy<Value = ModelManifold> {
    (0..default_catalog().len()).prop_map(|i| default_catalog().swap_remove(i))
}

fn sphere_point(theta: f64, phi: f64) -> Point {
    Point::Sphere2([theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()])
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn r_delta_solves_its_quadratic(d in 0.0..50.0f64, t in 1e-3..1e3f64, delta in 1e-4..1e2f64) {
        let r = r_delta(d, t, delta).unwrap();
        prop_assert!(r > 0.0);
        prop_assert!(rel_close(r * (r + d), delta * t, 1e-12));
    }

    #[test]
    fn time_parameters_bracket_t(d in 1e-3..50.0f64, t in 1e-3..1e3f64, delta in 1e-4..1e2f64) {
        let lo = t_lower(d, t, delta).unwrap();
        let hi = t_upper(d, t, delta).unwrap();
        prop_assert!(!lo.degenerate);
        prop_assert!(lo.value > 0.0 && lo.value < t);
        prop_assert!(hi > t);
    }

    #[test]
    fn f_is_at_least_one(delta in 1e-6..1e3f64, rho in 0.0..1e6f64, n in 1usize..8) {
        prop_assert!(f_factor(delta, rho, n).unwrap() >= 1.0);
    }

    #[test]
    fn sphere_kernel_is_symmetric(
        a in 0.0..PI, b in 0.0..2.0 * PI, c in 0.0..PI, e in 0.0..2.0 * PI, t in 0.05..5.0f64,
    ) {
        let m = ModelManifold::sphere2();
        let (x, y) = (sphere_point(a, b), sphere_point(c, e));
        // stay off the cut locus, where the series is refused
        prop_assume!(m.distance(&x, &y).unwrap() < 3.0);
        let cfg = SeriesConfig::default();
        let xy = log_heat_kernel(&m, &x, &y, t, &cfg).unwrap();
        let yx = log_heat_kernel(&m, &y, &x, t, &cfg).unwrap();
        prop_assert!((xy - yx).abs() <= 1e-10);
    }

    #[test]
    fn product_kernel_is_symmetric(u in -3.0..3.0f64, v in -3.0..3.0f64, s in 0.0..2.0 * PI, w in 0.0..2.0 * PI, t in 0.01..10.0f64) {
        let m: ModelManifold = "prod:rn:n=1+circle:L=6.283185307179586".parse().unwrap();
        let x = Point::Product(vec![Point::Euclidean(vec![u]), Point::Circle(s)]);
        let y = Point::Product(vec![Point::Euclidean(vec![v]), Point::Circle(w)]);
        let cfg = SeriesConfig::default();
        let xy = log_heat_kernel(&m, &x, &y, t, &cfg).unwrap();
        let yx = log_heat_kernel(&m, &y, &x, t, &cfg).unwrap();
        prop_assert!((xy - yx).abs() <= 1e-12 * xy.abs().max(1.0));
    }

    #[test]
    fn bishop_ratio_is_non_increasing(m in catalog_index(), r1 in 1e-3..6.0f64, frac in 0.0..1.0f64) {
        let r2 = r1 + frac * 6.0;
        let x = m.origin();
        let n = m.dimension();
        let q1 = m.ball_volume(&x, r1).unwrap() / euclidean_ball_volume(n, r1).unwrap();
        let q2 = m.ball_volume(&x, r2).unwrap() / euclidean_ball_volume(n, r2).unwrap();
        prop_assert!(q1 >= q2 - 1e-9, "{m}: {q1} < {q2} at r = {r1}, {r2}");
    }

    #[test]
    fn volume_sandwich(m in catalog_index(), t in 1e-3..50.0f64, alpha in 0.01..0.99f64, frac in 0.0..1.0f64) {
        let s = frac * (1.0 - alpha) * t;
        let x = m.origin();
        let n = m.dimension() as f64;
        let v = |r: f64| m.ball_volume(&x, r).unwrap();
        let mid = v(t.sqrt());
        prop_assert!(v((alpha * t + s).sqrt()) <= mid * (1.0 + 1e-12));
        prop_assert!(mid <= alpha.powf(-0.5 * n) * v((alpha * t).sqrt()) * (1.0 + 1e-12));
    }

    #[test]
    fn theta_is_non_increasing(which in 0usize..4, r1 in 1e-3..3.0f64, frac in 0.0..1.0f64) {
        let m = match which {
            0 => ModelManifold::euclidean(1).unwrap(),
            1 => ModelManifold::euclidean(2).unwrap(),
            2 => ModelManifold::euclidean(3).unwrap(),
            _ => ModelManifold::sphere2(),
        };
        let r2 = (r1 + frac * 3.0).min(3.1);
        let x = m.origin();
        let n = m.dimension() as f64;
        let theta = |r: f64| m.sphere_area(&x, r).unwrap() / (n * r.powf(n - 1.0));
        let (a, b) = (theta(r1), theta(r2));
        prop_assert!(a >= b * (1.0 - 1e-12));
        if which < 3 {
            prop_assert!(rel_close(a, b, 1e-12));
        }
    }

    #[test]
    fn bounds_enclose_kernel(m in catalog_index(), dfrac in 0.0..1.0f64, lt in -2.0..2.0f64, ld in -1.0..1.0f64) {
        let t = 10f64.powf(lt);
        let delta = 10f64.powf(ld);
        let dmax = m.diameter().map_or(4.0, |diam| diam.min(4.0));
        let d = dfrac * dmax;
        let x = m.origin();
        let y = m.point_at_distance(d).unwrap();
        let ln_h = match log_heat_kernel(&m, &x, &y, t, &SeriesConfig::default()) {
            Ok(v) => v,
            Err(e) if e.is_precision() => return Ok(()),
            Err(e) => panic!("{e}"),
        };
        for symmetric in [false, true] {
            let lo = lower_bound(&m, &x, &y, t, delta, symmetric).unwrap();
            let up = upper_bound(&m, &x, &y, t, delta, symmetric).unwrap();
            prop_assert!(lo.ln_value <= ln_h + 1e-9, "{m} lower above H at d={d}, t={t}, δ={delta}");
            prop_assert!(up.ln_value >= ln_h - 1e-9, "{m} upper below H at d={d}, t={t}, δ={delta}");
        }
    }
}
