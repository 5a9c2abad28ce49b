//! Independent reference implementations used by the integration tests.
//! These deliberately avoid the library's search code: plain grids,
//! plain bisection, plain f64 arithmetic.
#![allow(dead_code, clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::LN_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use urllc_core::fbl::q_tail;
use urllc_core::harness::{build_scenario, Template};
use urllc_core::{ChannelModel, Gains, Scenario};

/// Tiny instance: D = 32, M = 40, E = 30, ε1 ≤ 1e-3.
pub fn tiny_instance() -> Scenario {
    let gains = Gains {
        h1: 20.0,
        h2: 4.0,
        h3: 10.0,
    };
    Scenario::new(32, 40, 30.0, 1e-3, gains).unwrap()
}

/// Default geometry with the given budgets.
pub fn default_instance_with(symbols: u32, energy_joule: f64) -> Scenario {
    let t = Template {
        budget_symbols: symbols,
        energy_joule,
        ..Template::default()
    };
    build_scenario(&ChannelModel::default(), &t, None).unwrap()
}

pub fn default_instance() -> Scenario {
    default_instance_with(100, 5e-5)
}

/// Q by composite Simpson over `[x, x + 40]`.
pub fn q_quadrature(x: f64) -> f64 {
    let n = 200_000;
    let h = 40.0 / n as f64;
    let phi = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut sum = phi(x) + phi(x + 40.0);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * phi(x + i as f64 * h);
    }
    sum * h / 3.0
}

/// Normal-approximation error, written out from the rate formula.
pub fn eps(gamma: f64, m: u32, d: u32) -> f64 {
    if !(gamma > 0.0) {
        return 1.0;
    }
    let v = 1.0 - 1.0 / ((1.0 + gamma) * (1.0 + gamma));
    let m = m as f64;
    let f = (m / v).sqrt() * ((1.0 + gamma).ln() - d as f64 * LN_2 / m);
    q_tail(f).value()
}

/// Smallest SNR at which `m` symbols carry `d` bits below capacity.
pub fn rate_floor(m: u32, d: u32) -> f64 {
    2f64.powf(d as f64 / m as f64) - 1.0
}

/// Smallest power reaching `target` on gain `h`.
pub fn min_power(h: f64, m: u32, d: u32, target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    while eps(hi * h, m, d) > target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if eps(mid * h, m, d) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

fn linspace(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| a + (b - a) * i as f64 / (n - 1) as f64)
}

/// Best `ln ε2` for OMA: every `(m1, m2)`, a `p1` grid, energy split exactly.
pub fn oracle_oma(s: &Scenario, p_grid: usize) -> f64 {
    let (d, m, e) = (s.data_bits(), s.budget_symbols(), s.energy_budget());
    let mut best = f64::INFINITY;
    for m1 in 1..m {
        let hi = e / m1 as f64;
        for p1 in linspace(0.0, hi, p_grid).skip(1) {
            if eps(p1 * s.h1(), m1, d) > s.eps1_max() {
                continue;
            }
            for m2 in 1..=(m - m1) {
                let p2 = (e - m1 as f64 * p1) / m2 as f64;
                if p2 * s.h2() < rate_floor(m2, d) {
                    continue;
                }
                best = best.min(eps(p2 * s.h2(), m2, d).ln());
            }
            // larger p1 only takes energy from the actuator
            break;
        }
    }
    best
}

pub struct NomaPoint {
    pub eps_bar_1: f64,
    pub eps_2: f64,
    pub admissible: bool,
}

pub fn noma_point(s: &Scenario, p1: f64, p2: f64) -> NomaPoint {
    let (h1, h2, m, d) = (s.h1(), s.h2(), s.budget_symbols(), s.data_bits());
    let g21 = p2 * h1 / (p1 * h1 + 1.0);
    let g2 = p2 * h2 / (p1 * h2 + 1.0);
    let e21 = eps(g21, m, d);
    let e1 = eps(p1 * h1, m, d);
    let e1h = eps(p1 * h1 / (p2 * h1 + 1.0), m, d);
    let thr = rate_floor(m, d);
    NomaPoint {
        eps_bar_1: e1 * (1.0 - e21) + e1h * e21,
        eps_2: eps(g2, m, d),
        admissible: p1 <= p2 && g21 >= thr && g2 >= thr,
    }
}

/// Best `ln ε2` for NOMA on a `p1` grid with the full per-symbol budget.
pub fn oracle_noma(s: &Scenario, grid: usize) -> f64 {
    let total = s.energy_budget() / s.budget_symbols() as f64;
    let mut best = f64::INFINITY;
    for p1 in linspace(0.0, total / 2.0, grid).skip(1) {
        let pt = noma_point(s, p1, total - p1);
        if pt.admissible && pt.eps_bar_1 <= s.eps1_max() {
            best = best.min(pt.eps_2.ln());
        }
    }
    best
}

pub fn relay_value(s: &Scenario, m1: u32, m2: u32, ps: f64, pr: f64) -> (f64, f64) {
    let d = s.data_bits();
    let e1 = eps(ps * s.h1(), m1, 2 * d);
    let e2 = eps(pr * s.h3(), m2, d);
    let e2h = eps(ps * s.h2(), m1, 2 * d);
    (e1, ((1.0 - e1) * e2 + e1) * e2h)
}

/// Best `ln ε̄2` for the relay: every `(m1, m2)`, a `ps` grid on the
/// energy line.
pub fn oracle_relay(s: &Scenario, ps_grid: usize) -> f64 {
    let (d, m, e) = (s.data_bits(), s.budget_symbols(), s.energy_budget());
    let mut best = f64::INFINITY;
    for m1 in 1..m {
        let ps_lb = min_power(s.h1(), m1, 2 * d, s.eps1_max());
        for m2 in 1..=(m - m1) {
            let pr_floor = rate_floor(m2, d) / s.h3();
            let ps_ub = (e - m2 as f64 * pr_floor) / m1 as f64;
            if ps_lb > ps_ub {
                continue;
            }
            for ps in linspace(ps_lb, ps_ub, ps_grid) {
                let pr = (e - m1 as f64 * ps) / m2 as f64;
                let (e1, v) = relay_value(s, m1, m2, ps, pr);
                if e1 <= s.eps1_max() {
                    best = best.min(v.ln());
                }
            }
        }
    }
    best
}

pub fn cnoma_value(s: &Scenario, m1: u32, m2: u32, p1: f64, p2: f64, pr: f64) -> (f64, f64) {
    let (h1, h2, d) = (s.h1(), s.h2(), s.data_bits());
    let e21 = eps(p2 * h1 / (p1 * h1 + 1.0), m1, d);
    let e1 = eps(p1 * h1, m1, d);
    let e1h = eps(p1 * h1 / (p2 * h1 + 1.0), m1, d);
    let e2 = eps(pr * s.h3(), m2, d);
    let e2h = eps(p2 * h2 / (p1 * h2 + 1.0), m1, d);
    (e1 * (1.0 - e21) + e1h * e21, ((1.0 - e21) * e2 + e21) * e2h)
}

/// Admissible C-NOMA phase-1 powers: robot power at most half the sum, and
/// the actuator's signal decodable at the robot.
pub fn cnoma_admissible(s: &Scenario, m1: u32, p1: f64, t: f64) -> bool {
    let p2 = t - p1;
    p1 > 0.0 && p1 <= p2 && p2 * s.h1() / (p1 * s.h1() + 1.0) >= rate_floor(m1, s.data_bits())
}

/// Best `ln ε̄2` for C-NOMA: every `(m1, m2)`, a `(t, p1)` grid refined
/// twice around the best cell.
pub fn oracle_cnoma(s: &Scenario, grid: usize) -> f64 {
    let (d, m, e) = (s.data_bits(), s.budget_symbols(), s.energy_budget());
    let mut best = f64::INFINITY;
    for m1 in 1..m {
        for m2 in 1..=(m - m1) {
            let pr_floor = rate_floor(m2, d) / s.h3();
            let t_ub = (e - m2 as f64 * pr_floor) / m1 as f64;
            if !(t_ub > 0.0) {
                continue;
            }
            let eval = |t: f64, p1: f64| -> f64 {
                if !cnoma_admissible(s, m1, p1, t) {
                    return f64::INFINITY;
                }
                let pr = (e - m1 as f64 * t) / m2 as f64;
                let (eb1, v) = cnoma_value(s, m1, m2, p1, t - p1, pr);
                if eb1 <= s.eps1_max() {
                    v.ln()
                } else {
                    f64::INFINITY
                }
            };
            // p1 is searched as a fraction of t/2
            let (mut t_lo, mut t_hi, mut f_lo, mut f_hi) = (0.0, t_ub, 0.0, 1.0);
            let mut local = f64::INFINITY;
            for _ in 0..3 {
                let mut arg = None;
                for t in linspace(t_lo, t_hi, grid) {
                    for f in linspace(f_lo, f_hi, grid) {
                        let v = eval(t, f * t / 2.0);
                        if v < local {
                            local = v;
                            arg = Some((t, f));
                        }
                    }
                }
                let Some((t, f)) = arg else { break };
                let (dt, df) = (
                    (t_hi - t_lo) / (grid - 1) as f64,
                    (f_hi - f_lo) / (grid - 1) as f64,
                );
                (t_lo, t_hi) = ((t - dt).max(0.0), (t + dt).min(t_ub));
                (f_lo, f_hi) = ((f - df).max(0.0), (f + df).min(1.0));
            }
            best = best.min(local);
        }
    }
    best
}

/// Random two-device instance in the default geometry at the default
/// energy: robot somewhere on the controller–actuator line, random symbol
/// budget.
pub fn random_geometry(rng: &mut ChaCha8Rng) -> Template {
    let d1 = rng.gen_range(50.0..300.0);
    Template {
        d1,
        d3: 500.0 - d1,
        budget_symbols: rng.gen_range(60..=100),
        ..Template::default()
    }
}

/// Random tiny instance with hand-set gains.
pub fn random_tiny(rng: &mut ChaCha8Rng) -> Scenario {
    let h2 = rng.gen_range(2.0..8.0);
    let gains = Gains {
        h1: h2 * rng.gen_range(1.5..8.0),
        h2,
        h3: rng.gen_range(4.0..30.0),
    };
    Scenario::new(
        32,
        rng.gen_range(36..=48),
        rng.gen_range(20.0..45.0),
        1e-3,
        gains,
    )
    .unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
