//! Blocklength bounds for schemes that split the budget into two segments.
//!
//! Each segment carries `bits` over a link with normalised gain `gain`; at
//! blocklength `m` it needs more than `m·(2^{bits/m} − 1)/gain` energy to
//! operate below capacity. That requirement falls with `m`, so the smallest
//! admissible blocklength of one segment grows as the other segment's
//! minimum energy is subtracted from the budget. Iterating the two
//! tightenings converges to a fixed point.

use crate::error::{Error, Result};
use crate::fbl::min_power_for_rate;
use crate::search::smallest_satisfying;

/// One transmission segment: payload size and link gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkDemand {
    pub gain: f64,
    pub bits: u32,
}

impl LinkDemand {
    pub fn new(gain: f64, bits: u32) -> Self {
        LinkDemand { gain, bits }
    }

    /// `m·(2^{bits/m} − 1)/gain`: the energy floor at blocklength `m`.
    pub fn energy_floor(&self, m: u32) -> f64 {
        m as f64 * min_power_for_rate(self.gain, m, self.bits)
    }

    /// Smallest `m ∈ [1, max_m]` whose energy floor lies strictly below `budget`.
    pub fn min_blocklength_below(&self, budget: f64, max_m: u32) -> Option<u32> {
        smallest_satisfying(1, max_m, |m| self.energy_floor(m) < budget)
    }

    /// Smallest `m ∈ [1, max_m]` whose energy floor does not exceed `budget`.
    pub fn min_blocklength_within(&self, budget: f64, max_m: u32) -> Option<u32> {
        smallest_satisfying(1, max_m, |m| self.energy_floor(m) <= budget)
    }
}

/// Search region for the first segment and the floor of the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlocklengthBounds {
    pub m1_lb: u32,
    pub m1_ub: u32,
    pub m2_lb: u32,
}

/// Fixed point of the alternating bound tightening.
pub fn two_phase_bounds(
    budget_symbols: u32,
    energy: f64,
    first: LinkDemand,
    second: LinkDemand,
) -> Result<BlocklengthBounds> {
    two_phase_bounds_traced(budget_symbols, energy, first, second).map(|(b, _)| b)
}

/// [`two_phase_bounds`] plus the `(m1_lb, m2_lb)` iterate after every pass.
pub fn two_phase_bounds_traced(
    budget_symbols: u32,
    energy: f64,
    first: LinkDemand,
    second: LinkDemand,
) -> Result<(BlocklengthBounds, Vec<(u32, u32)>)> {
    let m = budget_symbols;
    let empty = || Error::infeasible("no blocklength split meets the energy floors");
    if m < 2 {
        return Err(empty());
    }
    let mut m1 = first
        .min_blocklength_below(energy, m - 1)
        .ok_or_else(empty)?;
    let mut m2 = second
        .min_blocklength_below(energy, m - 1)
        .ok_or_else(empty)?;
    let mut trace = vec![(m1, m2)];
    loop {
        if m1 + m2 > m {
            return Err(empty());
        }
        // Whatever m1 turns out to be, the second segment gets at most
        // M − m1_lb symbols and so needs at least that much energy.
        let reserve2 = second.energy_floor(m - m1);
        let reserve1 = first.energy_floor(m - m2);
        let n1 = first
            .min_blocklength_below(energy - reserve2, m - m2)
            .ok_or_else(empty)?;
        let n2 = second
            .min_blocklength_below(energy - reserve1, m - m1)
            .ok_or_else(empty)?;
        let next = (n1.max(m1), n2.max(m2));
        if next == (m1, m2) {
            break;
        }
        (m1, m2) = next;
        trace.push(next);
    }
    Ok((
        BlocklengthBounds {
            m1_lb: m1,
            m1_ub: m - m2,
            m2_lb: m2,
        },
        trace,
    ))
}
