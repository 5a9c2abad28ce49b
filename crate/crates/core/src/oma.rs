//! Orthogonal access: robot and actuator get disjoint symbol segments.
//!
//! At the optimum the robot's error sits exactly at its target and the
//! energy budget is exhausted, so each robot blocklength `m1` fixes the
//! robot's power and leaves a residual energy for the actuator; the solver
//! enumerates the bounded `(m1, m2)` pairs.

use crate::bounds::{two_phase_bounds, BlocklengthBounds, LinkDemand};
use crate::error::{Error, Result};
use crate::fbl::{decode_error_or_fail, power_for_error, ErrorProb, RateModel};
use crate::outcome::{replaces, Outcome};
use crate::scenario::Scenario;
use crate::search::bisect_root;

use std::f64::consts::{E, LN_2};

/// SNR above which the unit-dispersion model is trusted for choosing `m2`.
pub const HIGH_SNR_GAMMA: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmaAllocation {
    pub m1: u32,
    pub m2: u32,
    pub p1: f64,
    pub p2: f64,
}

pub type OmaOutcome = Outcome<OmaAllocation>;

/// Whether the concave high-SNR shortcut may replace the `m2` enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FastPath {
    /// Use it when the actuator SNR is at least [`HIGH_SNR_GAMMA`] over the
    /// whole `m2` range.
    #[default]
    Auto,
    Off,
}

fn demands(s: &Scenario) -> (LinkDemand, LinkDemand) {
    (
        LinkDemand::new(s.h1(), s.data_bits()),
        LinkDemand::new(s.h2(), s.data_bits()),
    )
}

/// Search region for the robot's blocklength.
pub fn oma_bounds(s: &Scenario) -> Result<BlocklengthBounds> {
    let (a, b) = demands(s);
    two_phase_bounds(s.budget_symbols(), s.energy_budget(), a, b)
}

/// Smallest actuator blocklength whose energy floor fits in what the robot
/// leaves over at `(m1, p1_star)`.
pub fn m2_lower_given_m1(s: &Scenario, m1: u32, p1_star: f64) -> Result<u32> {
    let (_, b) = demands(s);
    let residual = s.energy_budget() - m1 as f64 * p1_star;
    let max_m2 = s.budget_symbols().saturating_sub(m1);
    b.min_blocklength_within(residual, max_m2)
        .ok_or_else(|| Error::infeasible(format!("no actuator blocklength fits after m1 = {m1}")))
}

/// High-SNR objective `√m·ln(1 + a/m) − D·ln2/√m`, with `a = E2·h2`; the
/// actuator error is `Q` of this.
pub fn high_snr_margin(m: f64, a: f64, d_bits: u32) -> f64 {
    m.sqrt() * (a / m).ln_1p() - d_bits as f64 * LN_2 / m.sqrt()
}

/// Derivative of [`high_snr_margin`] in `m`.
pub fn high_snr_margin_slope(m: f64, a: f64, d_bits: u32) -> f64 {
    let r = m.sqrt();
    (a / m).ln_1p() / (2.0 * r) - a / (r * (m + a)) + d_bits as f64 * LN_2 / (2.0 * m * r)
}

/// Best actuator blocklength at robot allocation `(m1, p1)` under the
/// unit-dispersion model, valid while the margin is concave in `m2`.
///
/// Fails with [`Error::Precondition`] when `E2·h2/(M − m1) < e − 1`.
pub fn solve_oma_highsnr_inner(s: &Scenario, m1: u32, p1: f64) -> Result<(u32, f64)> {
    let e2 = s.energy_budget() - m1 as f64 * p1;
    let hi = s.budget_symbols().saturating_sub(m1);
    if hi == 0 || !(e2 > 0.0) {
        return Err(Error::infeasible(
            "no energy or symbols left for the actuator",
        ));
    }
    let a = e2 * s.h2();
    let per_symbol = a / hi as f64;
    if per_symbol < E - 1.0 {
        return Err(Error::Precondition(format!(
            "margin not certified concave: E2·h2/(M − m1) = {per_symbol} < e − 1"
        )));
    }
    let lo = m2_lower_given_m1(s, m1, p1)?;
    let d = s.data_bits();
    let slope = |m: f64| high_snr_margin_slope(m, a, d);
    let m2 = if lo == hi || slope(lo as f64) <= 0.0 {
        lo
    } else if slope(hi as f64) >= 0.0 {
        hi
    } else {
        let root = bisect_root(lo as f64, hi as f64, "high-SNR stationary point", |m| {
            -slope(m)
        })?;
        let below = (root.floor() as u32).clamp(lo, hi);
        let above = (below + 1).min(hi);
        if high_snr_margin(above as f64, a, d) > high_snr_margin(below as f64, a, d) {
            above
        } else {
            below
        }
    };
    Ok((m2, e2 / m2 as f64))
}

pub fn solve_oma(s: &Scenario) -> OmaOutcome {
    solve_oma_with(s, FastPath::Auto)
}

pub fn solve_oma_with(s: &Scenario, fast: FastPath) -> OmaOutcome {
    let Ok(bounds) = oma_bounds(s) else {
        return Outcome::infeasible();
    };
    let (h1, h2) = (s.h1(), s.h2());
    let (d, m, e) = (s.data_bits(), s.budget_symbols(), s.energy_budget());
    let eps_max = s.eps1_max();
    let mut best: Option<(f64, OmaAllocation)> = None;

    for m1 in bounds.m1_lb..=bounds.m1_ub {
        // Screen: even the whole budget cannot bring the robot to target.
        if decode_error_or_fail(e / m1 as f64 * h1, m1, d, RateModel::Exact).value() > eps_max {
            continue;
        }
        let Ok(p1) = power_for_error(h1, m1, d, eps_max, RateModel::Exact) else {
            continue;
        };
        let e2 = e - m1 as f64 * p1;
        if !(e2 > 0.0) {
            continue;
        }
        let Ok(m2_lb) = m2_lower_given_m1(s, m1, p1) else {
            continue;
        };
        let m2_ub = m - m1;
        let mut consider = |m2: u32| {
            let p2 = e2 / m2 as f64;
            let ln = decode_error_or_fail(p2 * h2, m2, d, RateModel::Exact).ln();
            let cand = OmaAllocation { m1, m2, p1, p2 };
            let take = match &best {
                None => true,
                Some((ln_b, b)) => replaces(ln, (m1, m2), *ln_b, (b.m1, b.m2)),
            };
            if take {
                best = Some((ln, cand));
            }
        };
        let gamma_min = e2 * h2 / m2_ub as f64;
        if fast == FastPath::Auto && gamma_min >= HIGH_SNR_GAMMA {
            if let Ok((m2, _)) = solve_oma_highsnr_inner(s, m1, p1) {
                consider(m2);
                continue;
            }
        }
        for m2 in m2_lb..=m2_ub {
            consider(m2);
        }
    }

    match best {
        None => Outcome::infeasible(),
        Some((ln, a)) => Outcome {
            eps_robot: Some(decode_error_or_fail(a.p1 * h1, a.m1, d, RateModel::Exact)),
            eps_target: ErrorProb::from_ln(ln),
            allocation: Some(a),
        },
    }
}
