//! Cooperative NOMA: superposed broadcast in phase 1, relayed actuator
//! packet in phase 2.
//!
//! Phase 1 sends both `D`-bit packets by superposition over `m1` symbols
//! with SIC at the robot; phase 2 forwards the actuator's packet over `m2`
//! symbols. For a fixed phase-1 power sum `t = p1 + p2` the actuator's error
//! grows with `p1`, so the best split is the smallest `p1` meeting the
//! robot's target.

use std::cell::RefCell;

use crate::bounds::{two_phase_bounds, BlocklengthBounds};
use crate::error::{Error, Result};
use crate::fbl::{
    decode_error, decode_error_or_fail, power_for_error, rate_threshold_snr, ErrorProb, RateModel,
    Snr,
};
use crate::noma::sic_average;
use crate::outcome::{replaces, Outcome};
use crate::relay::{phase_demands, PRUNE_REL_SLACK};
use crate::scenario::Scenario;
use crate::search::{bisect_root, first_hit, golden_section_min, linspace, GOLDEN_REL_WIDTH};

/// Default grid sizes for the power-sum scan and the per-sum `p1` bracket scan.
pub const CNOMA_T_GRID_POINTS: usize = 2000;
pub const CNOMA_P1_GRID_POINTS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CnomaOptions {
    pub t_grid: usize,
    pub p1_grid: usize,
}

impl Default for CnomaOptions {
    fn default() -> Self {
        CnomaOptions {
            t_grid: CNOMA_T_GRID_POINTS,
            p1_grid: CNOMA_P1_GRID_POINTS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CnomaAllocation {
    pub m1: u32,
    pub m2: u32,
    pub p1: f64,
    pub p2: f64,
    pub pr: f64,
}

pub type CnomaOutcome = Outcome<CnomaAllocation>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CnomaErrorBundle {
    pub eps_2_at_1: ErrorProb,
    pub eps_1: ErrorProb,
    pub eps_1_hat: ErrorProb,
    pub eps_bar_1: ErrorProb,
    /// Relay hop to the actuator.
    pub eps_2: ErrorProb,
    /// Actuator decoding the phase-1 superposition.
    pub eps_2_hat: ErrorProb,
    pub eps_bar_2: ErrorProb,
}

/// `((1 − ε21)·ε2 + ε21)·ε̂2`: forwarding happens when the robot recovered
/// the actuator's packet in phase 1.
pub fn cnoma_combine(eps_2_at_1: ErrorProb, eps_2: ErrorProb, eps_2_hat: ErrorProb) -> ErrorProb {
    eps_2_at_1
        .complement()
        .and(eps_2)
        .plus(eps_2_at_1)
        .and(eps_2_hat)
}

pub fn cnoma_error_bundle(
    p1: f64,
    p2: f64,
    pr: f64,
    m1: u32,
    m2: u32,
    s: &Scenario,
) -> Result<CnomaErrorBundle> {
    let (h1, h2, d) = (s.h1(), s.h2(), s.data_bits());
    let e = |g: f64, m: u32| decode_error(Snr(g), m, d, RateModel::Exact);
    let eps_2_at_1 = e(p2 * h1 / (p1 * h1 + 1.0), m1)?;
    let eps_1 = e(p1 * h1, m1)?;
    let eps_1_hat = e(p1 * h1 / (p2 * h1 + 1.0), m1)?;
    let eps_2 = e(pr * s.h3(), m2)?;
    let eps_2_hat = e(p2 * h2 / (p1 * h2 + 1.0), m1)?;
    Ok(CnomaErrorBundle {
        eps_2_at_1,
        eps_1,
        eps_1_hat,
        eps_bar_1: sic_average(eps_1, eps_1_hat, eps_2_at_1),
        eps_2,
        eps_2_hat,
        eps_bar_2: cnoma_combine(eps_2_at_1, eps_2, eps_2_hat),
    })
}

/// Search region for the broadcast blocklength. The phase-1 sum power must
/// exceed `(2^{2D/m1} − 1)/h1`, the same floor as the relay broadcast.
pub fn cnoma_bounds(s: &Scenario) -> Result<BlocklengthBounds> {
    let (a, b) = phase_demands(s);
    two_phase_bounds(s.budget_symbols(), s.energy_budget(), a, b)
}

/// Lowest phase-1 powers at `m1`: `p1` meets the robot's target with perfect
/// cancellation, `p2` keeps the actuator's signal decodable at the robot.
fn phase1_floor(s: &Scenario, m1: u32) -> Result<(f64, f64)> {
    let (h1, d) = (s.h1(), s.data_bits());
    let p1 = power_for_error(h1, m1, d, s.eps1_max(), RateModel::Exact)?;
    let p2 = rate_threshold_snr(m1, d) * (1.0 + p1 * h1) / h1;
    Ok((p1, p2))
}

/// Smallest relay blocklength that fits in the energy phase 1 leaves at
/// its power floor.
pub fn cnoma_m2_lower_given_m1(s: &Scenario, m1: u32) -> Result<u32> {
    let (p1, p2) = phase1_floor(s, m1)?;
    let (_, hop) = phase_demands(s);
    let residual = s.energy_budget() - m1 as f64 * (p1 + p2);
    hop.min_blocklength_within(residual, s.budget_symbols().saturating_sub(m1))
        .ok_or_else(|| Error::infeasible(format!("no relay blocklength fits after m1 = {m1}")))
}

fn t_ceiling(s: &Scenario, m1: u32, m2: u32) -> f64 {
    let (_, hop) = phase_demands(s);
    (s.energy_budget() - hop.energy_floor(m2)) / m1 as f64
}

/// Range of the phase-1 power sum `t = p1 + p2` at `(m1, m2)`.
pub fn cnoma_t_range(s: &Scenario, m1: u32, m2: u32) -> Result<(f64, f64)> {
    let (p1, p2) = phase1_floor(s, m1)?;
    let (lb, ub) = (p1 + p2, t_ceiling(s, m1, m2));
    if lb > ub {
        return Err(Error::infeasible(format!(
            "phase-1 power range empty at (m1, m2) = ({m1}, {m2})"
        )));
    }
    Ok((lb, ub))
}

/// Phase-1 quantities that depend on `m1` only.
struct Phase1<'a> {
    s: &'a Scenario,
    m1: u32,
    p1_lb: f64,
    t_lb: f64,
    p1_grid: usize,
}

impl<'a> Phase1<'a> {
    fn new(s: &'a Scenario, m1: u32, p1_grid: usize) -> Result<Self> {
        let (p1_lb, p2_lb) = phase1_floor(s, m1)?;
        Ok(Phase1 {
            s,
            m1,
            p1_lb,
            t_lb: p1_lb + p2_lb,
            p1_grid,
        })
    }

    fn eps(&self, gamma: f64) -> ErrorProb {
        decode_error_or_fail(gamma, self.m1, self.s.data_bits(), RateModel::Exact)
    }

    fn eps_2_at_1(&self, p1: f64, p2: f64) -> ErrorProb {
        let h1 = self.s.h1();
        self.eps(p2 * h1 / (p1 * h1 + 1.0))
    }

    fn eps_2_hat(&self, p1: f64, p2: f64) -> ErrorProb {
        let h2 = self.s.h2();
        self.eps(p2 * h2 / (p1 * h2 + 1.0))
    }

    fn robot_parts(&self, p1: f64, t: f64) -> (ErrorProb, ErrorProb, ErrorProb) {
        let h1 = self.s.h1();
        let p2 = t - p1;
        (
            self.eps(p1 * h1),
            self.eps(p1 * h1 / (p2 * h1 + 1.0)),
            self.eps_2_at_1(p1, p2),
        )
    }

    fn ln_eps_bar_1(&self, p1: f64, t: f64) -> f64 {
        let (e1, eh1, e21) = self.robot_parts(p1, t);
        sic_average(e1, eh1, e21).ln()
    }

    fn p1_ceiling(&self, t: f64) -> f64 {
        let h1 = self.s.h1();
        let shrink = 1.0 / (1.0 + rate_threshold_snr(self.m1, self.s.data_bits()));
        (t * shrink - 1.0 / h1 + shrink / h1).min(t / 2.0)
    }

    /// Smallest robot power on the `p1` bracket grid at which the robot
    /// meets its target, for power sum `t`.
    fn p1_given_t(&self, t: f64) -> Option<f64> {
        let (lo, hi) = (self.p1_lb, self.p1_ceiling(t));
        if !(hi >= lo) {
            return None;
        }
        let ln_target = self.s.eps1_max().ln();
        let grid = if hi > lo {
            linspace(lo, hi, self.p1_grid.max(2))
        } else {
            vec![lo]
        };
        let hit = |i: usize| self.ln_eps_bar_1(grid[i], t) <= ln_target;
        // ε1 and ε̂1 fall with p1 while ε21 rises, which bounds ε̄1 from
        // below on a grid segment.
        let may_contain = |i: usize, j: usize| {
            let (e1_b, eh1_b, e21_b) = self.robot_parts(grid[j], t);
            let (_, _, e21_a) = self.robot_parts(grid[i], t);
            let lb = e1_b.and(e21_b.complement()).ln().max(eh1_b.and(e21_a).ln());
            lb <= ln_target
        };
        let i = first_hit(grid.len(), hit, may_contain)?;
        if i == 0 {
            return Some(grid[0]);
        }
        bisect_root(grid[i - 1], grid[i], "robot SIC constraint", |p| {
            self.ln_eps_bar_1(p, t) - ln_target
        })
        .ok()
    }
}

/// Actuator objective at fixed `(m1, m2)` as a function of `t`.
struct PairObjective<'p, 'a> {
    ph: &'p Phase1<'a>,
    m2: u32,
}

impl PairObjective<'_, '_> {
    fn pr(&self, t: f64) -> f64 {
        (self.ph.s.energy_budget() - t * self.ph.m1 as f64) / self.m2 as f64
    }

    fn eps_2(&self, t: f64) -> ErrorProb {
        let s = self.ph.s;
        decode_error_or_fail(
            self.pr(t) * s.h3(),
            self.m2,
            s.data_bits(),
            RateModel::Exact,
        )
    }

    fn ln_eps_at(&self, p1: f64, t: f64) -> f64 {
        let p2 = t - p1;
        cnoma_combine(
            self.ph.eps_2_at_1(p1, p2),
            self.eps_2(t),
            self.ph.eps_2_hat(p1, p2),
        )
        .ln()
    }

    /// Lower bound on `ln ε̄2` over `t ∈ [t_a, t_b]`: ε̄2 ≥ max(ε2, ε21)·ε̂2,
    /// with ε2 smallest at `t_a` and the phase-1 terms smallest at
    /// `(p1_lb, t_b)`.
    fn ln_lower_bound(&self, t_a: f64, t_b: f64) -> f64 {
        let p2 = t_b - self.ph.p1_lb;
        let e21 = self.ph.eps_2_at_1(self.ph.p1_lb, p2);
        let eh = self.ph.eps_2_hat(self.ph.p1_lb, p2);
        self.eps_2(t_a).ln().max(e21.ln()) + eh.ln()
    }
}

pub fn solve_cnoma(s: &Scenario) -> CnomaOutcome {
    solve_cnoma_with(s, CnomaOptions::default())
}

/// Per-`m1` state shared by every `m2`: a common `t` grid and the cached
/// robot power at each of its points.
struct SharedGrid<'a> {
    phase1: Phase1<'a>,
    t: Vec<f64>,
    p1: RefCell<Vec<Option<Option<f64>>>>,
}

impl SharedGrid<'_> {
    fn p1_at(&self, i: usize) -> Option<f64> {
        if let Some(v) = self.p1.borrow()[i] {
            return v;
        }
        let v = self.phase1.p1_given_t(self.t[i]);
        self.p1.borrow_mut()[i] = Some(v);
        v
    }
}

/// [`solve_cnoma`] with custom grid sizes.
///
/// The `t` grid for a given `m1` spans the widest range over all `m2` and
/// is shared between them; each pair scans the grid points inside its own
/// range plus its upper end, then refines by golden section. Pairs and grid
/// points that provably cannot beat the incumbent are skipped.
pub fn solve_cnoma_with(s: &Scenario, opts: CnomaOptions) -> CnomaOutcome {
    let Ok(bounds) = cnoma_bounds(s) else {
        return Outcome::infeasible();
    };
    let m = s.budget_symbols();

    let mut grids: Vec<SharedGrid> = Vec::new();
    let mut pairs = Vec::new();
    for m1 in bounds.m1_lb..=bounds.m1_ub {
        let Ok(phase1) = Phase1::new(s, m1, opts.p1_grid) else {
            continue;
        };
        let Ok(m2_lb) = cnoma_m2_lower_given_m1(s, m1) else {
            continue;
        };
        let t_max = t_ceiling(s, m1, m - m1);
        let t = if t_max > phase1.t_lb {
            linspace(phase1.t_lb, t_max, opts.t_grid.max(2))
        } else {
            vec![phase1.t_lb]
        };
        let g = grids.len();
        for m2 in m2_lb..=(m - m1) {
            let t_ub = t_ceiling(s, m1, m2);
            if t_ub < phase1.t_lb {
                continue;
            }
            let bound = PairObjective { ph: &phase1, m2 }.ln_lower_bound(phase1.t_lb, t_ub);
            pairs.push((bound, m1, m2, g, t_ub));
        }
        let n = t.len();
        grids.push(SharedGrid {
            phase1,
            t,
            p1: RefCell::new(vec![None; n]),
        });
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));

    let mut best: Option<(f64, f64, CnomaAllocation)> = None;
    let beaten = |ln_bound: f64, best: &Option<(f64, f64, CnomaAllocation)>| match best {
        Some((ln_b, _, _)) => ln_bound > ln_b + PRUNE_REL_SLACK * ln_b.abs(),
        None => false,
    };
    for (bound, m1, m2, g, t_ub) in pairs {
        if beaten(bound, &best) {
            break;
        }
        let grid = &grids[g];
        let obj = PairObjective {
            ph: &grid.phase1,
            m2,
        };
        // (t, p1 or None) points inside this pair's range
        let mut scan: Vec<(f64, Option<usize>)> = grid
            .t
            .iter()
            .enumerate()
            .take_while(|(_, &t)| t <= t_ub)
            .map(|(i, &t)| (t, Some(i)))
            .collect();
        if scan.last().is_none_or(|&(t, _)| t < t_ub) {
            scan.push((t_ub, None));
        }
        let mut values: Vec<Option<(f64, f64)>> = vec![None; scan.len()];
        let mut best_k: Option<usize> = None;
        for (k, &(t, idx)) in scan.iter().enumerate() {
            if beaten(obj.ln_lower_bound(t, t), &best) {
                continue;
            }
            let p1 = match idx {
                Some(i) => grid.p1_at(i),
                None => grid.phase1.p1_given_t(t),
            };
            if let Some(p1) = p1 {
                let ln = obj.ln_eps_at(p1, t);
                if best_k.is_none_or(|b| values[b].is_none_or(|(l, _)| ln < l)) {
                    best_k = Some(k);
                }
                values[k] = Some((ln, p1));
            }
        }
        let Some(k) = best_k else { continue };
        let Some((mut ln, mut p1)) = values[k] else {
            continue;
        };
        let mut t = scan[k].0;
        let lo = scan[k.saturating_sub(1)].0;
        let hi = scan[(k + 1).min(scan.len() - 1)].0;
        if hi > lo {
            let eval = |t: f64| match grid.phase1.p1_given_t(t) {
                Some(p1) => obj.ln_eps_at(p1, t),
                None => f64::INFINITY,
            };
            let (tr, lr) = golden_section_min(lo, hi, GOLDEN_REL_WIDTH, eval);
            if lr < ln {
                if let Some(pr1) = grid.phase1.p1_given_t(tr) {
                    (t, ln, p1) = (tr, lr, pr1);
                }
            }
        }
        let cand = CnomaAllocation {
            m1,
            m2,
            p1,
            p2: t - p1,
            pr: obj.pr(t),
        };
        let take = match &best {
            None => true,
            Some((ln_b, t_b, b)) => replaces(ln, (m1, m2, t), *ln_b, (b.m1, b.m2, *t_b)),
        };
        if take {
            best = Some((ln, t, cand));
        }
    }

    match best {
        None => Outcome::infeasible(),
        Some((_, _, a)) => match cnoma_error_bundle(a.p1, a.p2, a.pr, a.m1, a.m2, s) {
            Ok(b) => Outcome {
                allocation: Some(a),
                eps_target: b.eps_bar_2,
                eps_robot: Some(b.eps_bar_1),
            },
            Err(_) => Outcome::infeasible(),
        },
    }
}
