//! Superposition coding over the whole block with SIC at the robot.
//!
//! The robot first decodes the actuator's signal; if that succeeds it
//! cancels it and decodes its own, otherwise it decodes its own packet
//! treating the actuator's as noise. The actuator always decodes its packet
//! treating the robot's as noise.

use crate::error::{Error, Result};
use crate::fbl::{decode_error_or_fail, power_for_error, rate_threshold_snr, ErrorProb, RateModel};
use crate::outcome::{replaces, Outcome};
use crate::scenario::Scenario;
use crate::search::{bisect_root, linspace};

/// Default number of points in the bracketing scan over `p1`.
pub const NOMA_GRID_POINTS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NomaAllocation {
    pub p1: f64,
    pub p2: f64,
}

pub type NomaOutcome = Outcome<NomaAllocation>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NomaSinrs {
    /// Robot decoding the actuator's signal.
    pub gamma_2_at_1: f64,
    /// Robot decoding its own signal after cancellation.
    pub gamma_1: f64,
    /// Robot decoding its own signal without cancellation.
    pub gamma_1_hat: f64,
    /// Actuator decoding its own signal.
    pub gamma_2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NomaErrorBundle {
    pub eps_2_at_1: ErrorProb,
    pub eps_1: ErrorProb,
    pub eps_1_hat: ErrorProb,
    /// Robot error averaged over SIC success and failure.
    pub eps_bar_1: ErrorProb,
    pub eps_2: ErrorProb,
}

pub fn noma_sinrs(p1: f64, p2: f64, s: &Scenario) -> NomaSinrs {
    let (h1, h2) = (s.h1(), s.h2());
    NomaSinrs {
        gamma_2_at_1: p2 * h1 / (p1 * h1 + 1.0),
        gamma_1: p1 * h1,
        gamma_1_hat: p1 * h1 / (p2 * h1 + 1.0),
        gamma_2: p2 * h2 / (p1 * h2 + 1.0),
    }
}

/// `ε1·(1 − ε21) + ε̂1·ε21`.
pub fn sic_average(eps_1: ErrorProb, eps_1_hat: ErrorProb, eps_2_at_1: ErrorProb) -> ErrorProb {
    eps_1
        .and(eps_2_at_1.complement())
        .plus(eps_1_hat.and(eps_2_at_1))
}

/// All error probabilities at powers `(p1, p2)` over the full block.
///
/// A nonpositive SINR counts as certain failure.
pub fn noma_error_bundle(p1: f64, p2: f64, s: &Scenario) -> NomaErrorBundle {
    let g = noma_sinrs(p1, p2, s);
    let (m, d) = (s.budget_symbols(), s.data_bits());
    let eps = |gamma: f64| decode_error_or_fail(gamma, m, d, RateModel::Exact);
    let eps_2_at_1 = eps(g.gamma_2_at_1);
    let eps_1 = eps(g.gamma_1);
    let eps_1_hat = eps(g.gamma_1_hat);
    NomaErrorBundle {
        eps_2_at_1,
        eps_1,
        eps_1_hat,
        eps_bar_1: sic_average(eps_1, eps_1_hat, eps_2_at_1),
        eps_2: eps(g.gamma_2),
    }
}

/// Admissible range of the robot's power.
///
/// The lower end brings the robot to target with perfect cancellation; the
/// upper end keeps both receivers able to decode the actuator's signal
/// below capacity and the robot's power no larger than the actuator's.
pub fn noma_p1_bounds(s: &Scenario) -> Result<(f64, f64)> {
    let (m, d) = (s.budget_symbols(), s.data_bits());
    let lb = power_for_error(s.h1(), m, d, s.eps1_max(), RateModel::Exact)?;
    let per_symbol = s.energy_budget() / m as f64;
    let shrink = 1.0 / (1.0 + rate_threshold_snr(m, d));
    let interference_cap = |h: f64| per_symbol * shrink - 1.0 / h + shrink / h;
    let ub = interference_cap(s.h1())
        .min(interference_cap(s.h2()))
        .min(per_symbol / 2.0);
    if lb > ub {
        return Err(Error::infeasible(format!(
            "robot power range empty: [{lb}, {ub}]"
        )));
    }
    Ok((lb, ub))
}

pub fn solve_noma(s: &Scenario) -> NomaOutcome {
    solve_noma_with(s, NOMA_GRID_POINTS)
}

/// [`solve_noma`] with a custom bracketing grid size (at least 2).
pub fn solve_noma_with(s: &Scenario, grid_points: usize) -> NomaOutcome {
    let Ok((lb, ub)) = noma_p1_bounds(s) else {
        return Outcome::infeasible();
    };
    let per_symbol = s.energy_budget() / s.budget_symbols() as f64;
    let ln_target = s.eps1_max().ln();
    let excess = |p1: f64| noma_error_bundle(p1, per_symbol - p1, s).eps_bar_1.ln() - ln_target;

    let mut candidates = Vec::new();
    let grid = if lb < ub {
        linspace(lb, ub, grid_points.max(2))
    } else {
        vec![lb]
    };
    let values: Vec<f64> = grid.iter().map(|&p| excess(p)).collect();
    if values[0] <= 0.0 {
        candidates.push(lb);
    }
    for i in 1..grid.len() {
        if (values[i - 1] <= 0.0) != (values[i] <= 0.0) {
            if let Ok(root) = bisect_root(grid[i - 1], grid[i], "robot SIC constraint", &excess) {
                candidates.push(root);
            }
        }
    }

    let mut best: Option<(f64, NomaAllocation, NomaErrorBundle)> = None;
    for p1 in candidates {
        let p2 = per_symbol - p1;
        let bundle = noma_error_bundle(p1, p2, s);
        if bundle.eps_bar_1.value() > s.eps1_max() {
            continue;
        }
        let ln = bundle.eps_2.ln();
        let take = match &best {
            None => true,
            Some((ln_b, b, _)) => replaces(ln, p1, *ln_b, b.p1),
        };
        if take {
            best = Some((ln, NomaAllocation { p1, p2 }, bundle));
        }
    }
    match best {
        None => Outcome::infeasible(),
        Some((_, a, b)) => Outcome {
            allocation: Some(a),
            eps_target: b.eps_2,
            eps_robot: Some(b.eps_bar_1),
        },
    }
}
