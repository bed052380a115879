//! Choice of δ that makes a bound family tightest at a single (x, y, t).

use serde::{Deserialize, Serialize};

use super::{lower_bound, upper_bound, BoundValue};
use crate::error::Result;
use crate::geometry::{ModelManifold, Point};
use crate::special::golden_section_minimize;

pub const DELTA_MIN: f64 = 1e-6;
pub const DELTA_MAX: f64 = 1e3;
/// Bracket tolerance in ln δ.
const LN_DELTA_TOL: f64 = 1e-6;
const SCAN_POINTS: usize = 241;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizeSide {
    Lower,
    Upper,
}

impl std::str::FromStr for OptimizeSide {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lower" => Ok(OptimizeSide::Lower),
            "upper" => Ok(OptimizeSide::Upper),
            other => Err(crate::Error::usage(format!("unknown side '{other}', expected lower|upper"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaOptimum {
    pub side: OptimizeSide,
    pub delta: f64,
    pub bound: BoundValue,
    /// The optimum sits on an end of [DELTA_MIN, DELTA_MAX].
    pub at_boundary: bool,
}

/// Maximise the lower bound or minimise the upper bound over δ ∈ [1e-6, 1e3].
///
/// The bound is not assumed unimodal in δ (the upper prefactor jumps between
/// its branches): a coarse log-grid scan picks a bracket, and golden-section
/// search on ln δ refines it.
pub fn optimize_delta(
    m: &ModelManifold,
    x: &Point,
    y: &Point,
    t: f64,
    side: OptimizeSide,
) -> Result<DeltaOptimum> {
    let eval = |delta: f64| -> Result<BoundValue> {
        match side {
            OptimizeSide::Lower => lower_bound(m, x, y, t, delta, false),
            OptimizeSide::Upper => upper_bound(m, x, y, t, delta, false),
        }
    };
    // minimise `cost`: −ln lower or +ln upper
    let cost = |b: &BoundValue| match side {
        OptimizeSide::Lower => -b.ln_value,
        OptimizeSide::Upper => b.ln_value,
    };
    let (lo, hi) = (DELTA_MIN.ln(), DELTA_MAX.ln());
    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| if i == SCAN_POINTS - 1 { hi } else { lo + step * i as f64 })
        .collect();
    let mut costs = Vec::with_capacity(grid.len());
    for u in &grid {
        costs.push(cost(&eval(u.exp())?));
    }
    let best = costs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();

    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(grid.len() - 1)];
    let mut failure = None;
    let refined = golden_section_minimize(
        |u| match eval(u.exp()) {
            Ok(v) => cost(&v),
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        },
        a,
        b,
        LN_DELTA_TOL,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let (u_best, _) = if refined.value <= costs[best] {
        (refined.x, refined.value)
    } else {
        (grid[best], costs[best])
    };
    let delta = u_best.exp().clamp(DELTA_MIN, DELTA_MAX);
    let at_boundary = u_best - lo < 0.5 * step || hi - u_best < 0.5 * step;
    let bound = eval(delta)?;
    Ok(DeltaOptimum { side, delta, bound, at_boundary })
}
