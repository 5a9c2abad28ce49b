//! Decode-and-forward relaying through the robot.
//!
//! Phase 1 broadcasts a combined `2D`-bit packet to both devices over `m1`
//! symbols. Phase 2 has the robot forward the actuator's `D` bits over `m2`
//! symbols. The actuator fails only if it misses the phase-1 broadcast and
//! the relayed packet does not reach it.

use crate::bounds::{two_phase_bounds, BlocklengthBounds, LinkDemand};
use crate::error::{Error, Result};
use crate::fbl::{
    decode_error, decode_error_or_fail, min_power_for_rate, power_for_error, ErrorProb, RateModel,
    Snr,
};
use crate::outcome::{replaces, Outcome};
use crate::scenario::Scenario;
use crate::search::{grid_then_golden, GOLDEN_REL_WIDTH};

/// Default grid size of the per-pair source power scan.
pub const RELAY_GRID_POINTS: usize = 2000;

/// Relative slack on the pruning test, far above the tie tolerance.
pub(crate) const PRUNE_REL_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayAllocation {
    pub m1: u32,
    pub m2: u32,
    pub ps: f64,
    pub pr: f64,
}

pub type RelayOutcome = Outcome<RelayAllocation>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayErrorBundle {
    /// Robot decoding the combined packet.
    pub eps_1: ErrorProb,
    /// Actuator decoding the relayed packet.
    pub eps_2: ErrorProb,
    /// Actuator decoding the combined packet.
    pub eps_2_hat: ErrorProb,
    pub eps_bar_2: ErrorProb,
}

/// `((1 − ε1)·ε2 + ε1)·ε̂2`.
pub fn relay_combine(eps_1: ErrorProb, eps_2: ErrorProb, eps_2_hat: ErrorProb) -> ErrorProb {
    eps_1.complement().and(eps_2).plus(eps_1).and(eps_2_hat)
}

pub fn relay_error_bundle(
    ps: f64,
    pr: f64,
    m1: u32,
    m2: u32,
    s: &Scenario,
) -> Result<RelayErrorBundle> {
    let d = s.data_bits();
    let eps_1 = decode_error(Snr(ps * s.h1()), m1, 2 * d, RateModel::Exact)?;
    let eps_2 = decode_error(Snr(pr * s.h3()), m2, d, RateModel::Exact)?;
    let eps_2_hat = decode_error(Snr(ps * s.h2()), m1, 2 * d, RateModel::Exact)?;
    Ok(RelayErrorBundle {
        eps_1,
        eps_2,
        eps_2_hat,
        eps_bar_2: relay_combine(eps_1, eps_2, eps_2_hat),
    })
}

pub(crate) fn phase_demands(s: &Scenario) -> (LinkDemand, LinkDemand) {
    (
        LinkDemand::new(s.h1(), 2 * s.data_bits()),
        LinkDemand::new(s.h3(), s.data_bits()),
    )
}

/// Search region for the broadcast blocklength.
pub fn relay_bounds(s: &Scenario) -> Result<BlocklengthBounds> {
    let (a, b) = phase_demands(s);
    two_phase_bounds(s.budget_symbols(), s.energy_budget(), a, b)
}

/// Source power bringing the robot to its target on the combined packet.
fn ps_floor(s: &Scenario, m1: u32) -> Result<f64> {
    power_for_error(
        s.h1(),
        m1,
        2 * s.data_bits(),
        s.eps1_max(),
        RateModel::Exact,
    )
}

fn ps_ceiling(s: &Scenario, m1: u32, m2: u32) -> f64 {
    let pr_lb = min_power_for_rate(s.h3(), m2, s.data_bits());
    s.energy_budget() / m1 as f64 - m2 as f64 / m1 as f64 * pr_lb
}

/// Admissible source power at blocklengths `(m1, m2)`.
pub fn relay_ps_range(s: &Scenario, m1: u32, m2: u32) -> Result<(f64, f64)> {
    let lb = ps_floor(s, m1)?;
    let ub = ps_ceiling(s, m1, m2);
    if lb > ub {
        return Err(Error::infeasible(format!(
            "source power range empty at (m1, m2) = ({m1}, {m2})"
        )));
    }
    Ok((lb, ub))
}

/// `ln ε̄2` along the energy line at blocklengths `(m1, m2)`.
struct PairObjective<'a> {
    s: &'a Scenario,
    m1: u32,
    m2: u32,
}

impl PairObjective<'_> {
    fn pr(&self, ps: f64) -> f64 {
        (self.s.energy_budget() - self.m1 as f64 * ps) / self.m2 as f64
    }

    fn parts(&self, ps: f64) -> (ErrorProb, ErrorProb, ErrorProb) {
        let d = self.s.data_bits();
        let e = |g: f64, m: u32, bits: u32| decode_error_or_fail(g, m, bits, RateModel::Exact);
        (
            e(ps * self.s.h1(), self.m1, 2 * d),
            e(self.pr(ps) * self.s.h3(), self.m2, d),
            e(ps * self.s.h2(), self.m1, 2 * d),
        )
    }

    fn ln_eps(&self, ps: f64) -> f64 {
        let (e1, e2, eh) = self.parts(ps);
        relay_combine(e1, e2, eh).ln()
    }

    /// Lower bound on `ln ε̄2` over `[lb, ub]`: ε1 and ε̂2 fall with `ps`,
    /// ε2 rises with it, and ε̄2 ≥ max(ε1, ε2)·ε̂2.
    fn ln_lower_bound(&self, lb: f64, ub: f64) -> f64 {
        let (e1_ub, _, eh_ub) = self.parts(ub);
        let (_, e2_lb, _) = self.parts(lb);
        e1_ub.ln().max(e2_lb.ln()) + eh_ub.ln()
    }
}

pub fn solve_relay(s: &Scenario) -> RelayOutcome {
    solve_relay_with(s, RELAY_GRID_POINTS)
}

/// [`solve_relay`] with a custom grid size.
///
/// Pairs are visited in order of a lower bound on their best error and the
/// scan stops once no remaining pair can match the incumbent, so the result
/// equals that of visiting every pair.
pub fn solve_relay_with(s: &Scenario, grid_points: usize) -> RelayOutcome {
    let Ok(bounds) = relay_bounds(s) else {
        return Outcome::infeasible();
    };
    let (_, hop) = phase_demands(s);
    let m = s.budget_symbols();

    let mut pairs = Vec::new();
    for m1 in bounds.m1_lb..=bounds.m1_ub {
        let Ok(lb) = ps_floor(s, m1) else { continue };
        let residual = s.energy_budget() - m1 as f64 * lb;
        let Some(m2_lb) = hop.min_blocklength_within(residual, m - m1) else {
            continue;
        };
        for m2 in m2_lb..=(m - m1) {
            let ub = ps_ceiling(s, m1, m2);
            if lb > ub {
                continue;
            }
            let obj = PairObjective { s, m1, m2 };
            pairs.push((obj.ln_lower_bound(lb, ub), m1, m2, lb, ub));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));

    let mut best: Option<(f64, RelayAllocation)> = None;
    for (bound, m1, m2, lb, ub) in pairs {
        if let Some((ln_b, _)) = &best {
            if bound > ln_b + PRUNE_REL_SLACK * ln_b.abs() {
                break;
            }
        }
        let obj = PairObjective { s, m1, m2 };
        let (ps, ln) = grid_then_golden(lb, ub, grid_points, GOLDEN_REL_WIDTH, |p| obj.ln_eps(p));
        let cand = RelayAllocation {
            m1,
            m2,
            ps,
            pr: obj.pr(ps),
        };
        let take = match &best {
            None => true,
            Some((ln_b, b)) => replaces(ln, (m1, m2, ps), *ln_b, (b.m1, b.m2, b.ps)),
        };
        if take {
            best = Some((ln, cand));
        }
    }

    match best {
        None => Outcome::infeasible(),
        Some((_, a)) => {
            let (e1, e2, eh) = PairObjective {
                s,
                m1: a.m1,
                m2: a.m2,
            }
            .parts(a.ps);
            Outcome {
                allocation: Some(a),
                eps_target: relay_combine(e1, e2, eh),
                eps_robot: Some(e1),
            }
        }
    }
}
