//! Crank–Nicolson march of the periodic heat equation, used as an
//! independent oracle for the circle kernel.

use super::circle::spectral_sum;
use super::SeriesConfig;
use crate::error::{Error, Result};

/// Periodic Crank–Nicolson solver on a uniform grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrankNicolsonCircle {
    pub nodes: usize,
    /// Bootstrap time as a fraction of L².
    pub bootstrap_fraction: f64,
    /// Step size relative to the current time in the early phase.
    pub relative_step: f64,
    /// Largest step as a fraction of L².
    pub max_step_fraction: f64,
}

impl Default for CrankNicolsonCircle {
    fn default() -> Self {
        Self {
            nodes: 2048,
            bootstrap_fraction: 1e-4,
            relative_step: 1e-2,
            max_step_fraction: 2.5e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdeSolution {
    pub length: f64,
    pub time: f64,
    pub values: Vec<f64>,
    pub steps: usize,
    /// max over all steps of |Σ u h − 1|
    pub max_mass_error: f64,
}

impl PdeSolution {
    pub fn spacing(&self) -> f64 {
        self.length / self.values.len() as f64
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spacing()
    }

    /// Four-point Lagrange interpolation at arc position `s`.
    pub fn value_at(&self, s: f64) -> f64 {
        let n = self.values.len();
        let h = self.spacing();
        let pos = s.rem_euclid(self.length) / h;
        let i = pos.floor() as isize;
        let f = pos - i as f64;
        let at = |k: isize| self.values[(i + k).rem_euclid(n as isize) as usize];
        let (pm, p0, p1, p2) = (at(-1), at(0), at(1), at(2));
        -f * (f - 1.0) * (f - 2.0) / 6.0 * pm
            + (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0 * p0
            - (f + 1.0) * f * (f - 2.0) / 2.0 * p1
            + (f + 1.0) * f * (f - 1.0) / 6.0 * p2
    }
}

impl CrankNicolsonCircle {
    pub fn bootstrap_time(&self, length: f64) -> f64 {
        self.bootstrap_fraction * length * length
    }

    /// March the kernel centred at 0 from t₀ to `t`.
    pub fn solve(&self, length: f64, t: f64) -> Result<PdeSolution> {
        if !(length > 0.0) {
            return Err(Error::domain("circle length must be positive"));
        }
        if self.nodes < 8 {
            return Err(Error::usage("the PDE oracle needs at least 8 nodes"));
        }
        let t0 = self.bootstrap_time(length);
        if !(t >= 2.0 * t0) {
            return Err(Error::domain(format!(
                "PDE oracle needs t ≥ 2t₀ = {}, got {t}",
                2.0 * t0
            )));
        }
        let n = self.nodes;
        let h = length / n as f64;
        let cfg = SeriesConfig::default();
        let mut u = (0..n)
            .map(|i| {
                let s = i as f64 * h;
                spectral_sum(length, s.min(length - s), t0, &cfg)
            })
            .collect::<Result<Vec<_>>>()?;

        let mass = |v: &[f64]| v.iter().sum::<f64>() * h;
        let mut max_mass_error = (mass(&u) - 1.0).abs();
        let mut now = t0;
        let mut steps = 0;
        let max_step = self.max_step_fraction * length * length;
        let mut rhs = vec![0.0; n];
        let mut work = CyclicWork::new(n);
        while now < t {
            let mut dt = (self.relative_step * now).min(max_step);
            if now + dt >= t * (1.0 - 1e-14) {
                dt = t - now;
            }
            let r = 0.5 * dt / (h * h);
            for i in 0..n {
                let left = u[(i + n - 1) % n];
                let right = u[(i + 1) % n];
                rhs[i] = u[i] + r * (left - 2.0 * u[i] + right);
            }
            work.solve(-r, 1.0 + 2.0 * r, &rhs, &mut u);
            now += dt;
            steps += 1;
            max_mass_error = max_mass_error.max((mass(&u) - 1.0).abs());
        }
        Ok(PdeSolution { length, time: t, values: u, steps, max_mass_error })
    }
}

/// Scratch space for the symmetric cyclic tridiagonal system with constant
/// off-diagonal `off` and diagonal `diag`, solved by Sherman–Morrison.
struct CyclicWork {
    c_prime: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
    corr: Vec<f64>,
}

impl CyclicWork {
    fn new(n: usize) -> Self {
        Self { c_prime: vec![0.0; n], y: vec![0.0; n], z: vec![0.0; n], corr: vec![0.0; n] }
    }

    fn thomas(c_prime: &mut [f64], off: f64, diag: &[f64], rhs: &[f64], out: &mut [f64]) {
        let n = rhs.len();
        c_prime[0] = off / diag[0];
        out[0] = rhs[0] / diag[0];
        for i in 1..n {
            let m = diag[i] - off * c_prime[i - 1];
            c_prime[i] = off / m;
            out[i] = (rhs[i] - off * out[i - 1]) / m;
        }
        for i in (0..n - 1).rev() {
            out[i] -= c_prime[i] * out[i + 1];
        }
    }

    fn solve(&mut self, off: f64, diag: f64, rhs: &[f64], out: &mut [f64]) {
        let n = rhs.len();
        let gamma = -diag;
        let mut d = vec![diag; n];
        d[0] = diag - gamma;
        d[n - 1] = diag - off * off / gamma;
        Self::thomas(&mut self.c_prime, off, &d, rhs, &mut self.y);
        self.corr.iter_mut().for_each(|v| *v = 0.0);
        self.corr[0] = gamma;
        self.corr[n - 1] = off;
        Self::thomas(&mut self.c_prime, off, &d, &self.corr, &mut self.z);
        let fact = (self.y[0] + off * self.y[n - 1] / gamma)
            / (1.0 + self.z[0] + off * self.z[n - 1] / gamma);
        for i in 0..n {
            out[i] = self.y[i] - fact * self.z[i];
        }
    }
}

/// Circle heat kernel at arc distance `d` from the default Crank–Nicolson march.
pub fn pde_oracle_circle(length: f64, d: f64, t: f64) -> Result<f64> {
    let sol = CrankNicolsonCircle::default().solve(length, t)?;
    Ok(sol.value_at(d))
}
