//! The δ = 1 specialisations and their weaker closed forms, returned link by
//! link so each stated inequality step can be checked.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{lower_bound, r_delta, upper_bound};
use crate::error::{Error, Result};
use crate::geometry::{ModelManifold, Point};
use crate::special::ln_unit_ball_volume;

/// How a link relates to the previous element of its chain (the first link
/// relates to the kernel itself).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// previous ≥ this
    Ge,
    /// previous ≤ this
    Le,
    /// previous = this
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainLink {
    pub label: &'static str,
    pub ln_value: f64,
    pub relation: Relation,
}

impl ChainLink {
    /// Signed log-scale margin against the previous element.
    pub fn margin(&self, ln_previous: f64) -> f64 {
        match self.relation {
            Relation::Ge => ln_previous - self.ln_value,
            Relation::Le => self.ln_value - ln_previous,
            Relation::Eq => -(self.ln_value - ln_previous).abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaOneChains {
    pub d: f64,
    pub t: f64,
    /// R(t) = (√(d²+4t) − d)/2
    pub radius: f64,
    pub lower: Vec<ChainLink>,
    pub lower_symmetric: Vec<ChainLink>,
    pub upper: Vec<ChainLink>,
    pub upper_symmetric: Vec<ChainLink>,
}

impl DeltaOneChains {
    pub fn chains(&self) -> [(&'static str, &[ChainLink]); 4] {
        [
            ("lower", &self.lower),
            ("lower_symmetric", &self.lower_symmetric),
            ("upper", &self.upper),
            ("upper_symmetric", &self.upper_symmetric),
        ]
    }

    /// Worst margin over every link of every chain, starting from ln H.
    pub fn worst_margin(&self, ln_kernel: f64) -> (f64, &'static str) {
        let mut worst = (f64::INFINITY, "");
        for (_, chain) in self.chains() {
            let mut prev = ln_kernel;
            for link in chain {
                let m = link.margin(prev);
                if m < worst.0 {
                    worst = (m, link.label);
                }
                prev = link.ln_value;
            }
        }
        worst
    }
}

pub fn bounds_delta1(m: &ModelManifold, x: &Point, y: &Point, t: f64) -> Result<DeltaOneChains> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("time must be positive, got {t}")));
    }
    let d = m.distance(x, y)?;
    let n = m.dimension();
    let nf = n as f64;
    let rho = d * d / (4.0 * t);
    let ln_s = ((rho + 1.0).sqrt() + rho.sqrt()).ln();
    let r = r_delta(d, t, 1.0)?;
    let ln_omega = ln_unit_ball_volume(n);
    let ln_vx_sqrt_t = m.ball_volume(x, t.sqrt())?.ln();
    let ln_vy_sqrt_t = m.ball_volume(y, t.sqrt())?.ln();
    let ln_vx_r = m.ball_volume(x, r)?.ln();
    let ln_vy_r = m.ball_volume(y, r)?.ln();
    let ln_4pi = (4.0 * PI).ln();
    let ln_2 = 2f64.ln();

    let l0 = lower_bound(m, x, y, t, 1.0, false)?;
    let l0s = lower_bound(m, x, y, t, 1.0, true)?;
    let lower_const = ln_omega - 1.0 - 0.5 * nf * ln_4pi;
    let lower = vec![
        ChainLink { label: "e^-1 V_Rn(R)/V_x(R) (4 pi t)^-n/2 e^-rho", ln_value: l0.ln_value, relation: Relation::Ge },
        ChainLink {
            label: "V_Rn(1)/(e (4 pi)^n/2) S^-n V_x^-1(sqrt t) e^-rho",
            ln_value: lower_const - nf * ln_s - ln_vx_sqrt_t - rho,
            relation: Relation::Ge,
        },
    ];
    let lower_symmetric = vec![
        ChainLink {
            label: "e^-1 V_Rn(R)/sqrt(V_x V_y)(R) (4 pi t)^-n/2 e^-rho",
            ln_value: l0s.ln_value,
            relation: Relation::Ge,
        },
        ChainLink {
            label: "V_Rn(1)/(e (4 pi)^n/2) S^-n V_x^-1/2 V_y^-1/2(sqrt t) e^-rho",
            ln_value: lower_const - nf * ln_s - 0.5 * (ln_vx_sqrt_t + ln_vy_sqrt_t) - rho,
            relation: Relation::Ge,
        },
    ];

    let u0 = upper_bound(m, x, y, t, 1.0, false)?;
    let u0s = upper_bound(m, x, y, t, 1.0, true)?;
    let upper_const = 0.5 * nf * ln_2 + 2.0;
    let half_sqrt_t = 0.5 * (ln_vx_sqrt_t + ln_vy_sqrt_t);
    let upper = vec![
        ChainLink { label: "f(1,rho) V_x^-1/2 V_y^-1/2(R) e^-rho", ln_value: u0.ln_value, relation: Relation::Le },
        ChainLink {
            label: "2^n/2 e^2 V_x^-1/2 V_y^-1/2(R) e^-rho",
            ln_value: upper_const - 0.5 * (ln_vx_r + ln_vy_r) - rho,
            relation: Relation::Le,
        },
        ChainLink {
            label: "2^n/2 e^2 (sqrt t/R)^n V_x^-1/2 V_y^-1/2(sqrt t) e^-rho",
            ln_value: upper_const + nf * (0.5 * t.ln() - r.ln()) - half_sqrt_t - rho,
            relation: Relation::Le,
        },
        ChainLink {
            label: "2^n/2 e^2 S^n V_x^-1/2 V_y^-1/2(sqrt t) e^-rho",
            ln_value: upper_const + nf * ln_s - half_sqrt_t - rho,
            relation: Relation::Eq,
        },
    ];
    let sym_const = 5.0 + 0.5 * nf * (16.0 * PI).ln() - ln_omega;
    let upper_symmetric = vec![
        ChainLink {
            label: "e f^2(1,rho) (4 pi t)^n/2/V_Rn(R) V_x^-1(R) e^-rho",
            ln_value: u0s.ln_value,
            relation: Relation::Le,
        },
        ChainLink {
            label: "e^5 2^n (4 pi t)^n/2/V_Rn(R) V_x^-1(R) e^-rho",
            ln_value: 5.0 + nf * ln_2 + 0.5 * nf * (ln_4pi + t.ln()) - (ln_omega + nf * r.ln()) - ln_vx_r - rho,
            relation: Relation::Le,
        },
        ChainLink {
            label: "e^5 (16 pi)^n/2/V_Rn(1) S^n V_x^-1(R) e^-rho",
            ln_value: sym_const + nf * ln_s - ln_vx_r - rho,
            relation: Relation::Le,
        },
        ChainLink {
            label: "e^5 (16 pi)^n/2/V_Rn(1) S^2n V_x^-1(sqrt t) e^-rho",
            ln_value: sym_const + 2.0 * nf * ln_s - ln_vx_sqrt_t - rho,
            relation: Relation::Le,
        },
    ];
    Ok(DeltaOneChains { d, t, radius: r, lower, lower_symmetric, upper, upper_symmetric })
}
