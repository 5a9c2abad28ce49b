//! Orthogonal access for `K` devices.
//!
//! Devices `1..K−1` each carry a reliability target; device `K` has its
//! error minimised. Under the unit-dispersion model the power device `k`
//! needs at blocklength `m` has the closed form
//! `χ(m) = (2^{D/m + A/√m} − 1)/h` with `A = Q^{-1}(ε_max)/ln2`, so the
//! constrained devices' energy `g(m) = m·χ(m)` is a function of blocklength
//! alone. For each candidate `m_K` the remaining symbols are split by
//! minimising `Σ g` (dual decomposition of the continuous relaxation, then
//! greedy integer rounding), and device `K` gets the leftover energy.

use std::f64::consts::LN_2;

use crate::bounds::LinkDemand;
use crate::error::{Error, Result};
use crate::fbl::{decode_error_or_fail, q_tail_inv, ErrorProb, RateModel};
use crate::outcome::{replaces, Outcome};
use crate::scenario::Scenario;
use crate::search::{bisect_boundary, MAX_BISECTION_ITERS};

/// A device with a reliability constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Device {
    pub gain: f64,
    pub eps_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiScenario {
    data_bits: u32,
    budget_symbols: u32,
    energy_budget: f64,
    devices: Vec<Device>,
    target_gain: f64,
}

impl MultiScenario {
    /// `devices` are the constrained devices in decreasing gain order;
    /// `target_gain` belongs to the last, weakest device.
    pub fn new(
        data_bits: u32,
        budget_symbols: u32,
        energy_budget: f64,
        devices: Vec<Device>,
        target_gain: f64,
    ) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        if devices.is_empty() {
            return bad("need at least two devices".into());
        }
        if data_bits < 1 || budget_symbols < devices.len() as u32 + 1 {
            return bad(format!(
                "{budget_symbols} symbols cannot serve {} devices",
                devices.len() + 1
            ));
        }
        if !(energy_budget > 0.0 && energy_budget.is_finite()) {
            return bad(format!(
                "energy budget must be positive, got {energy_budget}"
            ));
        }
        for d in &devices {
            if !(d.eps_max > 0.0 && d.eps_max < 0.5) {
                return bad(format!("error target {} outside (0, 0.5)", d.eps_max));
            }
        }
        let gains: Vec<f64> = devices
            .iter()
            .map(|d| d.gain)
            .chain([target_gain])
            .collect();
        if gains.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return bad("gains must be positive".into());
        }
        if gains.windows(2).any(|w| !(w[0] > w[1])) {
            return bad("gains must be strictly decreasing".into());
        }
        Ok(MultiScenario {
            data_bits,
            budget_symbols,
            energy_budget,
            devices,
            target_gain,
        })
    }

    /// The two-device instance: robot constrained, actuator as device K.
    pub fn from_two_device(s: &Scenario) -> Result<Self> {
        let robot = Device {
            gain: s.h1(),
            eps_max: s.eps1_max(),
        };
        Self::new(
            s.data_bits(),
            s.budget_symbols(),
            s.energy_budget(),
            vec![robot],
            s.h2(),
        )
    }

    pub fn data_bits(&self) -> u32 {
        self.data_bits
    }

    pub fn budget_symbols(&self) -> u32 {
        self.budget_symbols
    }

    pub fn energy_budget(&self) -> f64 {
        self.energy_budget
    }

    pub fn devices(&self) -> &[Device] {
        &self.devices
    }

    pub fn target_gain(&self) -> f64 {
        self.target_gain
    }

    /// Total number of devices `K`.
    pub fn device_count(&self) -> usize {
        self.devices.len() + 1
    }

    fn costs(&self) -> Result<Vec<EnergyCost>> {
        self.devices
            .iter()
            .map(|d| EnergyCost::new(self.data_bits, d.eps_max, d.gain))
            .collect()
    }

    fn target_demand(&self) -> LinkDemand {
        LinkDemand::new(self.target_gain, self.data_bits)
    }
}

/// `Q^{-1}(ε)/ln2`.
pub fn reliability_coefficient(eps_max: f64) -> Result<f64> {
    Ok(q_tail_inv(eps_max)? / LN_2)
}

/// Right-hand side `R` of the convexity condition `√m < R` for the energy
/// function of a device with packet size `d_bits` and coefficient `a`.
pub fn convexity_limit(d_bits: u32, a: f64) -> f64 {
    let l = a * LN_2;
    (0.75 * l + (9.0 / 16.0 * l * l + 8.0 * d_bits as f64 * LN_2).sqrt()) / 2.0
}

/// Energy needed by one constrained device as a function of its blocklength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyCost {
    pub d_bits: u32,
    /// `Q^{-1}(ε_max)/ln2`.
    pub a: f64,
    pub gain: f64,
}

impl EnergyCost {
    pub fn new(d_bits: u32, eps_max: f64, gain: f64) -> Result<Self> {
        Ok(EnergyCost {
            d_bits,
            a: reliability_coefficient(eps_max)?,
            gain,
        })
    }

    fn exponent(&self, m: f64) -> f64 {
        self.d_bits as f64 / m + self.a / m.sqrt()
    }

    /// Power `χ(m)`.
    pub fn chi(&self, m: f64) -> f64 {
        (self.exponent(m) * LN_2).exp_m1() / self.gain
    }

    /// Energy `g(m) = m·χ(m)`.
    pub fn energy(&self, m: f64) -> f64 {
        m * self.chi(m)
    }

    /// `g'(m)`.
    pub fn slope(&self, m: f64) -> f64 {
        let grow = (self.exponent(m) * LN_2).exp();
        let d = self.d_bits as f64;
        (grow * (1.0 - d * LN_2 / m - 0.5 * LN_2 * self.a / m.sqrt()) - 1.0) / self.gain
    }

    /// Whether `g` is certified decreasing and convex at `m`.
    pub fn certified_at(&self, m: f64) -> bool {
        m.sqrt() < convexity_limit(self.d_bits, self.a)
    }

    /// Minimiser of `g(m) + λ·m` over `[lo, hi]`, assuming `g` convex there.
    fn argmin_priced(&self, lambda: f64, lo: f64, hi: f64) -> f64 {
        if self.slope(lo) + lambda >= 0.0 {
            return lo;
        }
        if self.slope(hi) + lambda <= 0.0 {
            return hi;
        }
        bisect_boundary(lo, hi, 0.0, "priced blocklength", |m| {
            self.slope(m) + lambda >= 0.0
        })
        .map_or(lo, |(f, p)| 0.5 * (f + p))
    }
}

/// Power `χ(m)` for a device with target `eps_max` and gain `h`.
pub fn chi(m: f64, d_bits: u32, eps_max: f64, h: f64) -> Result<f64> {
    Ok(EnergyCost::new(d_bits, eps_max, h)?.chi(m))
}

/// `(g(m), g'(m))`.
pub fn g_energy(m: f64, d_bits: u32, eps_max: f64, h: f64) -> Result<(f64, f64)> {
    let c = EnergyCost::new(d_bits, eps_max, h)?;
    Ok((c.energy(m), c.slope(m)))
}

/// Blocklength ranges from the alternating tightening.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiBounds {
    /// Lower bounds of the constrained devices.
    pub lower: Vec<u32>,
    pub target_lb: u32,
    pub target_ub: u32,
}

fn min_over(lo: u32, hi: u32, f: impl Fn(u32) -> f64) -> f64 {
    (lo..=hi).map(f).fold(f64::INFINITY, f64::min)
}

/// Converged lower bounds for every device and the range of `m_K`.
pub fn multi_bounds(ms: &MultiScenario) -> Result<MultiBounds> {
    multi_bounds_traced(ms).map(|(b, _)| b)
}

/// [`multi_bounds`] plus the lower-bound vector (device `K` last) after
/// every pass.
pub fn multi_bounds_traced(ms: &MultiScenario) -> Result<(MultiBounds, Vec<Vec<u32>>)> {
    let costs = ms.costs()?;
    let target = ms.target_demand();
    let m = ms.budget_symbols;
    let e = ms.energy_budget;
    let k = costs.len();
    let empty = || Error::infeasible("no blocklength split meets every device's energy need");

    let need = |i: usize, mi: u32| -> f64 {
        if i < k {
            costs[i].energy(mi as f64)
        } else {
            target.energy_floor(mi)
        }
    };
    // device i admits mi when its need fits in the budget left by the others
    let admits = |i: usize, mi: u32, budget: f64| -> bool {
        if i < k {
            need(i, mi) <= budget
        } else {
            need(i, mi) < budget
        }
    };

    let mut lb = vec![1u32; k + 1];
    let mut trace = Vec::new();
    loop {
        let total: u32 = lb.iter().sum();
        if total > m {
            return Err(empty());
        }
        let mut next = lb.clone();
        for i in 0..=k {
            let others_lb = total - lb[i];
            let ub_i = m - others_lb;
            let reserve: f64 = (0..=k)
                .filter(|&j| j != i)
                .map(|j| min_over(lb[j], m - (total - lb[j]), |mj| need(j, mj)))
                .sum();
            let budget = e - reserve;
            next[i] = (lb[i]..=ub_i)
                .find(|&mi| admits(i, mi, budget))
                .ok_or_else(empty)?;
        }
        trace.push(next.clone());
        if next == lb {
            break;
        }
        lb = next;
    }
    let others: u32 = lb[..k].iter().sum();
    let bounds = MultiBounds {
        lower: lb[..k].to_vec(),
        target_lb: lb[k],
        target_ub: m - others,
    };
    Ok((bounds, trace))
}

/// Continuous split of `M − m_K` symbols among the constrained devices.
#[derive(Debug, Clone, PartialEq)]
pub struct DualState {
    pub lambda: f64,
    pub m_continuous: Vec<f64>,
}

/// Tolerance on `Σ m̄ − (M − m_K)`.
const SUM_TOL: f64 = 1e-7;

/// Minimises `Σ g_k(m_k)` subject to `Σ m_k = M − m_K` and `m_k ≥ lb_k`
/// by bisection on the multiplier of the sum constraint.
pub fn solve_relaxed_dual(ms: &MultiScenario, bounds: &MultiBounds, m_k: u32) -> Result<DualState> {
    let costs = ms.costs()?;
    let total = ms
        .budget_symbols
        .checked_sub(m_k)
        .ok_or_else(|| Error::infeasible(format!("m_K = {m_k} exceeds the symbol budget")))?
        as f64;
    let lbs: Vec<f64> = bounds.lower.iter().map(|&l| l as f64).collect();
    let lb_sum: f64 = lbs.iter().sum();
    if lb_sum > total {
        return Err(Error::infeasible(format!(
            "lower bounds need {lb_sum} symbols, only {total} left"
        )));
    }
    if costs.len() == 1 {
        return Ok(DualState {
            lambda: -costs[0].slope(total),
            m_continuous: vec![total],
        });
    }
    let caps: Vec<f64> = lbs.iter().map(|l| total - (lb_sum - l)).collect();
    let split = |lambda: f64| -> Vec<f64> {
        costs
            .iter()
            .zip(lbs.iter().zip(&caps))
            .map(|(c, (&lo, &hi))| c.argmin_priced(lambda, lo, hi))
            .collect()
    };
    let used = |v: &[f64]| v.iter().sum::<f64>();

    // every device at its lower bound
    let mut hi = costs
        .iter()
        .zip(&lbs)
        .map(|(c, &l)| -c.slope(l))
        .fold(0.0f64, f64::max);
    // every device at its cap; only needed past the slopes' zero crossings
    let mut lo = 0.0f64;
    if used(&split(0.0)) < total {
        lo = costs
            .iter()
            .zip(&caps)
            .map(|(c, &u)| -c.slope(u))
            .fold(0.0f64, f64::min);
    }
    let mut m_bar = split(hi);
    if (used(&m_bar) - total).abs() > SUM_TOL {
        let mut converged = false;
        for _ in 0..MAX_BISECTION_ITERS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            m_bar = split(mid);
            let s = used(&m_bar);
            if (s - total).abs() <= SUM_TOL {
                hi = mid;
                converged = true;
                break;
            }
            if s > total {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if !converged {
            return Err(Error::NoConvergence {
                what: "dual multiplier",
                iterations: MAX_BISECTION_ITERS,
            });
        }
    }
    Ok(DualState {
        lambda: hi,
        m_continuous: m_bar,
    })
}

/// Integer split: floors of `m_bar`, then one symbol at a time to the
/// device whose energy drops the most (smallest index on ties) until the
/// split sums to `total`.
pub fn greedy_round(m_bar: &[f64], costs: &[EnergyCost], lower: &[u32], total: u32) -> Vec<u32> {
    let mut m: Vec<u32> = m_bar
        .iter()
        .zip(lower)
        .map(|(&x, &l)| ((x + 1e-9).floor() as u32).max(l))
        .collect();
    while m.iter().sum::<u32>() < total {
        let mut pick = 0;
        let mut gain = f64::NEG_INFINITY;
        for (k, c) in costs.iter().enumerate() {
            let mk = m[k] as f64;
            let drop = c.energy(mk) - c.energy(mk + 1.0);
            if drop > gain {
                gain = drop;
                pick = k;
            }
        }
        m[pick] += 1;
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiAllocation {
    /// Blocklengths, device `K` last.
    pub blocklengths: Vec<u32>,
    /// Powers, device `K` last.
    pub powers: Vec<f64>,
    /// False when some device's range leaves the region where its energy
    /// function is certified convex.
    pub certified: bool,
}

pub type MultiOutcome = Outcome<MultiAllocation>;

/// Enumerates `m_K`, splits the remaining symbols by relaxation and
/// rounding, gives device `K` the leftover energy and keeps the best `m_K`.
pub fn solve_multi_oma(ms: &MultiScenario) -> MultiOutcome {
    let Ok(bounds) = multi_bounds(ms) else {
        return Outcome::infeasible();
    };
    let Ok(costs) = ms.costs() else {
        return Outcome::infeasible();
    };
    let (d, e) = (ms.data_bits, ms.energy_budget);
    let lb_sum: u32 = bounds.lower.iter().sum();
    let certified = costs.iter().zip(&bounds.lower).all(|(c, &l)| {
        let cap = ms.budget_symbols - bounds.target_lb - (lb_sum - l);
        c.certified_at(cap as f64)
    });

    let mut best: Option<(f64, u32, MultiAllocation)> = None;
    for m_k in bounds.target_lb..=bounds.target_ub {
        let Ok(dual) = solve_relaxed_dual(ms, &bounds, m_k) else {
            continue;
        };
        let m = greedy_round(
            &dual.m_continuous,
            &costs,
            &bounds.lower,
            ms.budget_symbols - m_k,
        );
        let mut powers: Vec<f64> = costs
            .iter()
            .zip(&m)
            .map(|(c, &mi)| c.chi(mi as f64))
            .collect();
        let spent: f64 = costs
            .iter()
            .zip(&m)
            .map(|(c, &mi)| c.energy(mi as f64))
            .sum();
        let p_k = (e - spent) / m_k as f64;
        if !(p_k > 0.0) {
            continue;
        }
        let ln = decode_error_or_fail(p_k * ms.target_gain, m_k, d, RateModel::HighSnr).ln();
        let take = match &best {
            None => true,
            Some((ln_b, mk_b, _)) => replaces(ln, m_k, *ln_b, *mk_b),
        };
        if take {
            powers.push(p_k);
            let mut blocklengths = m;
            blocklengths.push(m_k);
            best = Some((
                ln,
                m_k,
                MultiAllocation {
                    blocklengths,
                    powers,
                    certified,
                },
            ));
        }
    }

    match best {
        None => Outcome::infeasible(),
        Some((ln, _, a)) => {
            let robot = ms
                .devices
                .iter()
                .zip(&a.blocklengths)
                .zip(&a.powers)
                .map(|((dev, &mi), &p)| {
                    decode_error_or_fail(p * dev.gain, mi, d, RateModel::HighSnr)
                })
                .fold(ErrorProb::new(0.0).unwrap_or(ErrorProb::ONE), |acc, x| {
                    if x.ln() > acc.ln() {
                        x
                    } else {
                        acc
                    }
                });
            Outcome {
                allocation: Some(a),
                eps_target: ErrorProb::from_ln(ln),
                eps_robot: Some(robot),
            }
        }
    }
}
