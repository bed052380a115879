//! Acceptance criteria, one block each. Every criterion prints a single
//! PASS/FAIL line (written straight to stderr so it survives output
//! capture); the test fails at the end if any criterion failed.

use std::f64::consts::PI;
use std::io::Write as _;
use std::time::{Duration, Instant};

use heatbound::bounds::{bounds_delta1, lower_bound};
use heatbound::estimates::{
    c_n, check_classical, g_function, g_max, gradient_rhs, laplacian_rhs, sharp_coefficient,
    ClassicalCheck, ClassicalParams, EstimateMode,
};
use heatbound::kernels::{
    circle_kernel_image, circle_kernel_spectral, kernel_derivatives, log_heat_kernel,
    pde_oracle_circle, spectral_sum, sphere2_kernel, SeriesConfig,
};
use heatbound::special::{linspace, logspace};
use heatbound::verify::{
    asymptotic_diagnostics, default_asymptotic_times, default_catalog, derivative_sweep,
    sandwich_sweep, Grid, PathSpec, VerifyConfig, DEFAULT_ALPHAS, DEFAULT_DELTAS,
};
use heatbound::ModelManifold;

const SLACK: f64 = 1e-9;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn run(id: u32, name: &str, budget: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let mut out = f();
    let took = start.elapsed();
    if let Some(b) = budget {
        if took > b {
            out.ok = false;
            out.detail.push_str(&format!("; over time budget {b:?}"));
        }
    }
    let line = format!(
        "criterion {id:>2} {:<4} {name} [{:.2?}] {}\n",
        if out.ok { "PASS" } else { "FAIL" },
        took,
        out.detail
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
    out.ok
}

fn gaussian(n: usize, d: f64, t: f64) -> f64 {
    (4.0 * PI * t).powf(-0.5 * n as f64) * (-d * d / (4.0 * t)).exp()
}

fn manifold(spec: &str) -> ModelManifold {
    spec.parse().unwrap()
}

fn flat_exactness() -> Outcome {
    let cfg = SeriesConfig::default();
    let mut worst: f64 = 0.0;
    for n in 1..=3 {
        let m = ModelManifold::euclidean(n).unwrap();
        let x = m.origin();
        for &d in &linspace(0.0, 4.0, 10) {
            let y = m.point_at_distance(d).unwrap();
            for &t in &logspace(1e-2, 1e2, 10) {
                let h = log_heat_kernel(&m, &x, &y, t, &cfg).unwrap().exp();
                let g = gaussian(n, d, t);
                worst = worst.max((h / g - 1.0).abs());
                for &delta in &[0.1, 1.0, 10.0] {
                    let lo = lower_bound(&m, &x, &y, t, delta, false).unwrap();
                    let rescaled = (lo.ln_value + delta).exp();
                    worst = worst.max((rescaled / h - 1.0).abs());
                }
            }
        }
    }
    outcome(worst <= 1e-12, format!("max relative error {worst:.2e} (tol 1e-12)"))
}

fn sandwich() -> Outcome {
    let cfg = VerifyConfig::default();
    let mut worst = f64::INFINITY;
    let mut skipped = 0;
    let mut failures = Vec::new();
    for m in default_catalog() {
        let grid = Grid::sandwich_default(&m);
        let rep = sandwich_sweep(&m, &grid, &DEFAULT_DELTAS, &cfg).unwrap();
        skipped += rep.skipped;
        for r in &rep.records {
            for mg in [r.margin_lower, r.margin_upper].into_iter().flatten() {
                worst = worst.min(mg);
            }
        }
        for (k, w) in &rep.worst {
            if !k.starts_with("chain_") {
                worst = worst.min(w.margin);
            }
        }
        if !rep.passed() {
            failures.push(m.tag());
        }
    }
    outcome(
        failures.is_empty() && worst >= -SLACK,
        format!("worst log margin {worst:.2e}, {skipped} precision-skipped points, failing: {failures:?}"),
    )
}

fn cheeger_yau() -> Outcome {
    let specs = [
        "circle:L=6.283185307179586",
        "s2",
        "prod:rn:n=1+circle:L=6.283185307179586",
        "prod:circle:L=6.283185307179586+circle:L=6.283185307179586",
        "prod:rn:n=1+s2",
    ];
    let mut worst = f64::INFINITY;
    for s in specs {
        let m = manifold(s);
        let params = ClassicalParams::default_for(&m);
        let rep = check_classical(ClassicalCheck::CheegerYau, &m, &params).unwrap();
        worst = worst.min(rep.worst_margin().unwrap());
    }
    // δ → 0 on the sphere: lower bound approaches the Euclidean Gaussian
    let m = ModelManifold::sphere2();
    let x = m.origin();
    let mut dev: f64 = 0.0;
    for &d in &linspace(0.0, 3.0, 10) {
        let y = m.point_at_distance(d).unwrap();
        for &t in &logspace(1e-2, 1.0, 10) {
            let lo = lower_bound(&m, &x, &y, t, 1e-6, false).unwrap();
            dev = dev.max((lo.value / gaussian(2, d, t) - 1.0).abs());
        }
    }
    outcome(
        worst >= -SLACK && dev <= 1e-3,
        format!("worst H − Gaussian log margin {worst:.2e}; sphere δ=1e-6 deviation {dev:.2e} (tol 1e-3)"),
    )
}

fn chains() -> Outcome {
    let cfg = SeriesConfig::default();
    let mut worst = f64::INFINITY;
    let mut at = String::new();
    let mut points = 0;
    for m in default_catalog() {
        let grid = Grid::sandwich_default(&m);
        let x = m.origin();
        for &d in &grid.d {
            let y = m.point_at_distance(d).unwrap();
            for &t in &grid.t {
                let ln_h = match log_heat_kernel(&m, &x, &y, t, &cfg) {
                    Ok(v) => v,
                    Err(e) if e.is_precision() => continue,
                    Err(e) => panic!("{e}"),
                };
                let c = bounds_delta1(&m, &x, &y, t).unwrap();
                let (mg, name) = c.worst_margin(ln_h);
                points += 1;
                if mg < worst {
                    worst = mg;
                    at = format!("{name} on {m} at d={d:.3}, t={t:.3e}");
                }
            }
        }
    }
    outcome(worst >= -SLACK, format!("{points} points, worst link margin {worst:.2e} ({at})"))
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    f(0.5 * (a + b))
}

fn constants() -> Outcome {
    // 40-digit evaluations of C(n), n = 1..10
    const C_REF: [f64; 10] = [
        3.152518545527896729996,
        4.90504302810875142254,
        7.050376041756583621236,
        9.4799025456329894795,
        12.13116355293215318107,
        14.96404238705318885236,
        17.95067072449433211232,
        21.07058024581288520059,
        24.30810627259569085905,
        27.65087639211062919463,
    ];
    let mut g_err: f64 = 0.0;
    let mut c_err: f64 = 0.0;
    for n in 1..=10usize {
        let xs = linspace(0.0, 5.0, 5001);
        let i = (0..xs.len())
            .max_by(|&i, &j| g_function(n, xs[i]).total_cmp(&g_function(n, xs[j])))
            .unwrap();
        let lo = xs[i.saturating_sub(1)];
        let hi = xs[(i + 1).min(xs.len() - 1)];
        let numeric = golden_max(|x| g_function(n, x), lo, hi);
        let g = g_max(n).unwrap().value;
        g_err = g_err.max((g / numeric - 1.0).abs());
        c_err = c_err.max((c_n(n).unwrap() / C_REF[n - 1] - 1.0).abs());
    }
    outcome(
        g_err <= 1e-10 && c_err <= 1e-12,
        format!("g_max rel error {g_err:.2e} (tol 1e-10), c_n rel error {c_err:.2e} (tol 1e-12)"),
    )
}

fn gradient_laplacian() -> Outcome {
    let cfg = VerifyConfig::default();
    let mut failing = Vec::new();
    for n in 1..=3 {
        let m = ModelManifold::euclidean(n).unwrap();
        let rep = derivative_sweep(&m, &Grid::derivative_default(&m), &DEFAULT_ALPHAS, &cfg).unwrap();
        if !rep.passed() {
            failing.push(m.tag());
        }
    }
    let m = ModelManifold::euclidean(2).unwrap();
    let t: f64 = 1.0;
    let d = (4.0e6 * t).sqrt();
    let x = m.origin();
    let y = m.point_at_distance(d).unwrap();
    let k = kernel_derivatives(&m, &x, &y, t, &cfg.series).unwrap();
    let g = gradient_rhs(d, t, 2, EstimateMode::Sharp).unwrap();
    let l = laplacian_rhs(d, t, 2, EstimateMode::Sharp).unwrap();
    let coef = sharp_coefficient(d, t).unwrap();
    let grad_ratio = coef * t * k.grad_log_sq / g.rhs;
    let lap_ratio = l.rhs / (coef * t * k.laplacian_ratio);
    outcome(
        failing.is_empty() && grad_ratio >= 0.99 && grad_ratio <= 1.0 && (3.9..=4.1).contains(&lap_ratio),
        format!(
            "ℝⁿ sweeps failing: {failing:?}; ρ=1e6 gradient LHS/RHS {grad_ratio:.6}, Laplacian RHS/LHS {lap_ratio:.6}"
        ),
    )
}

fn classical() -> Outcome {
    let mut li_yau: f64 = 0.0;
    let mut worst = f64::INFINITY;
    let mut at = String::new();
    let mut evaluated = 0;
    for m in default_catalog() {
        let params = ClassicalParams::default_for(&m);
        if let ModelManifold::Euclidean { .. } = m {
            let rep = check_classical(ClassicalCheck::LiYauGradient, &m, &params).unwrap();
            for r in &rep.records {
                li_yau = li_yau.max(r.margin.abs());
            }
        }
        for check in [
            ClassicalCheck::Harnack,
            ClassicalCheck::MeanValue,
            ClassicalCheck::DaviesIntegral,
            ClassicalCheck::HamiltonGradient,
            ClassicalCheck::HamiltonLaplacian,
        ] {
            let rep = check_classical(check, &m, &params).unwrap();
            if !rep.applicable {
                continue;
            }
            evaluated += rep.records.len();
            if let Some(w) = rep.worst_margin() {
                if w < worst {
                    worst = w;
                    at = format!("{} on {m}", check.name());
                }
            }
        }
    }
    // exact equality cases (Gaussians) leave margins at rounding level
    outcome(
        li_yau <= 1e-12 && worst >= -1e-12,
        format!("li_yau_gradient |margin| ≤ {li_yau:.2e} (tol 1e-12); {evaluated} records, worst {worst:.2e} ({at})"),
    )
}

fn kernel_oracles() -> Outcome {
    let cfg = SeriesConfig::default();
    let l = 2.0 * PI;
    // the Fourier series cannot resolve values far below its O(1) terms;
    // such points are refused and counted, and every t keeps d = 0
    let mut dual: f64 = 0.0;
    let mut refused = 0;
    let mut every_t = true;
    for &t in &logspace(1e-3, 1e3, 25) {
        for &d in &linspace(0.0, PI, 9) {
            let a = circle_kernel_image(l, d, t, &cfg).unwrap();
            match circle_kernel_spectral(l, d, t, &cfg) {
                Ok(b) => dual = dual.max((a / b - 1.0).abs()),
                Err(e) if e.is_precision() => {
                    refused += 1;
                    every_t &= d > 0.0;
                }
                Err(e) => panic!("{e}"),
            }
        }
    }
    let mut pde: f64 = 0.0;
    for &t in &[0.1, 0.5, 2.0] {
        for &d in &[0.0, 1.0, PI] {
            let a = pde_oracle_circle(l, d, t).unwrap();
            let b = spectral_sum(l, d, t, &cfg).unwrap();
            pde = pde.max((a - b).abs());
        }
    }
    // ∫ H dA = 2π ∫₀^π H(θ) sin θ dθ by composite Gauss–Legendre
    let (nodes, weights) = heatbound::special::gauss_legendre(20);
    let mut norm: f64 = 0.0;
    for &t in &[1e-3, 1e-2, 0.1, 1.0, 10.0] {
        let panels = 400;
        let h = PI / panels as f64;
        let mut total = 0.0;
        for p in 0..panels {
            let a = p as f64 * h;
            for (z, w) in nodes.iter().zip(&weights) {
                let th = a + 0.5 * h * (z + 1.0);
                // refused values lie below the series' rounding floor
                let v = sphere2_kernel(th, t, &cfg).unwrap_or(0.0);
                total += 0.5 * h * w * v * th.sin();
            }
        }
        norm = norm.max((2.0 * PI * total - 1.0).abs());
    }
    outcome(
        dual <= 1e-10 && every_t && pde <= 1e-5 && norm <= 1e-9,
        format!("image/spectral {dual:.2e} (tol 1e-10, {refused}/225 below the series floor), CN {pde:.2e} (tol 1e-5), sphere mass {norm:.2e} (tol 1e-9)"),
    )
}

fn monotonicity() -> Outcome {
    let cfg = VerifyConfig::default();
    let times = default_asymptotic_times();
    let mut worst = f64::INFINITY;
    let mut flat: f64 = 0.0;
    for m in default_catalog() {
        let rep = asymptotic_diagnostics(&m, None, &times, &cfg).unwrap();
        let diag: Vec<_> = rep.records.iter().filter(|r| r.label.as_deref() == Some("on_diagonal")).collect();
        assert_eq!(diag.len() + rep.skipped, times.len());
        for r in &diag {
            if let Some(mg) = r.margin_lower {
                worst = worst.min(mg);
            }
        }
        if let ModelManifold::Euclidean { n } = m {
            let c = (4.0 * PI).powf(-0.5 * n as f64);
            for r in &diag {
                flat = flat.max((r.reference / c - 1.0).abs());
            }
        }
    }
    outcome(
        worst >= -1e-10 && flat <= 1e-12,
        format!("worst Δ ln(t^(n/2) H) {worst:.2e} (slack 1e-10); ℝⁿ deviation from constant {flat:.2e}"),
    )
}

fn asymptotics() -> Outcome {
    let cfg = VerifyConfig::default();
    let m = ModelManifold::euclidean(2).unwrap();
    let times = logspace(1.0, 1e6, 50);
    let rep = asymptotic_diagnostics(&m, Some(PathSpec::new(0.4, 1.0).unwrap()), &times, &cfg).unwrap();
    let rows: Vec<_> = rep.records.iter().filter(|r| r.label.as_deref() == Some("mvg_limit")).collect();
    let mut dev: f64 = 0.0;
    for r in &rows {
        assert!((r.d - r.t.powf(0.4)).abs() <= 1e-12 * r.d.max(1.0));
        dev = dev.max((r.reference / 0.25 - 1.0).abs());
    }
    outcome(
        rows.len() == times.len() && dev <= 1e-12,
        format!("{} path points, max relative deviation from 1/4 {dev:.2e} (tol 1e-12)", rows.len()),
    )
}

#[test]
fn acceptance() {
    let results = [
        run(1, "flat-space exactness", Some(Duration::from_secs(1)), flat_exactness),
        run(2, "sandwich on the catalog", Some(Duration::from_secs(120)), sandwich),
        run(3, "Cheeger-Yau recovery", None, cheeger_yau),
        run(4, "delta=1 chains", None, chains),
        run(5, "constants C(n), g_max", None, constants),
        run(6, "gradient/Laplacian estimates", None, gradient_laplacian),
        run(7, "classical inequalities", Some(Duration::from_secs(60)), classical),
        run(8, "kernel oracles", None, kernel_oracles),
        run(9, "on-diagonal monotonicity", None, monotonicity),
        run(10, "maximal-volume-growth limit", None, asymptotics),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, ok)| !**ok).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
