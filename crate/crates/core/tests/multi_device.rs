mod common;

use std::f64::consts::LN_2;

use rand::Rng;
use urllc_core::fbl::{decode_error, q_tail_inv};
use urllc_core::multi::{multi_bounds, solve_multi_oma, solve_relaxed_dual, Device, MultiScenario};
use urllc_core::{RateModel, Snr};

const D: u32 = 32;
const EPS: f64 = 1e-3;

/// Three constrained devices plus the target device.
fn four_device() -> MultiScenario {
    let devices = [40.0, 20.0, 10.0]
        .iter()
        .map(|&gain| Device { gain, eps_max: EPS })
        .collect();
    MultiScenario::new(D, 80, 60.0, devices, 4.0).unwrap()
}

/// Energy a constrained device needs at blocklength `m`, written out.
fn g(m: f64, h: f64) -> f64 {
    let a = q_tail_inv(EPS).unwrap() / LN_2;
    m * ((D as f64 / m + a / m.sqrt()) * LN_2).exp_m1() / h
}

fn dg(m: f64, h: f64) -> f64 {
    let step = 1e-5 * m;
    (g(m + step, h) - g(m - step, h)) / (2.0 * step)
}

/// Euclidean projection onto `{x ≥ lb, Σx = total}`.
fn project(y: &[f64], lb: &[f64], total: f64) -> Vec<f64> {
    let at = |tau: f64| -> Vec<f64> { y.iter().zip(lb).map(|(v, l)| (v - tau).max(*l)).collect() };
    let (mut lo, mut hi) = (-1e6, 1e6);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if at(mid).iter().sum::<f64>() > total {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Projected gradient descent with backtracking.
fn projected_gradient(gains: &[f64], lb: &[f64], total: f64) -> f64 {
    let obj = |x: &[f64]| x.iter().zip(gains).map(|(m, h)| g(*m, *h)).sum::<f64>();
    let n = gains.len() as f64;
    let mut x = project(&vec![total / n; gains.len()], lb, total);
    let mut step = 1.0;
    for _ in 0..20_000 {
        let grad: Vec<f64> = x.iter().zip(gains).map(|(m, h)| dg(*m, *h)).collect();
        let f0 = obj(&x);
        loop {
            let y: Vec<f64> = x.iter().zip(&grad).map(|(m, gr)| m - step * gr).collect();
            let cand = project(&y, lb, total);
            if obj(&cand) <= f0 || step < 1e-12 {
                x = cand;
                break;
            }
            step *= 0.5;
        }
        step *= 1.5;
    }
    obj(&x)
}

#[test]
fn relaxed_split_matches_projected_gradient() {
    let ms = four_device();
    let b = multi_bounds(&ms).unwrap();
    let gains = [40.0, 20.0, 10.0];
    let lb: Vec<f64> = b.lower.iter().map(|&l| l as f64).collect();
    for m_k in [b.target_lb, (b.target_lb + b.target_ub) / 2] {
        let total = (80 - m_k) as f64;
        let dual = solve_relaxed_dual(&ms, &b, m_k).unwrap();
        let got: f64 = dual
            .m_continuous
            .iter()
            .zip(&gains)
            .map(|(m, h)| g(*m, *h))
            .sum();
        let want = projected_gradient(&gains, &lb, total);
        assert!(
            (got - want).abs() <= 1e-6 * want,
            "m_K = {m_k}: dual {got}, projected gradient {want}"
        );
    }
}

#[test]
fn rounded_split_is_locally_optimal() {
    let ms = four_device();
    let b = multi_bounds(&ms).unwrap();
    let a = solve_multi_oma(&ms).allocation.unwrap();
    let gains = [40.0, 20.0, 10.0];
    let m = &a.blocklengths[..3];
    let total = |v: &[u32]| {
        v.iter()
            .zip(&gains)
            .map(|(&mi, h)| g(mi as f64, *h))
            .sum::<f64>()
    };
    let base = total(m);
    for i in 0..3 {
        for j in 0..3 {
            if i == j || m[i] <= b.lower[i] {
                continue;
            }
            let mut v = m.to_vec();
            v[i] -= 1;
            v[j] += 1;
            assert!(
                total(&v) >= base * (1.0 - 1e-12),
                "moving a symbol {i}→{j} helps"
            );
        }
    }
}

#[test]
fn no_random_allocation_beats_the_solver() {
    let ms = four_device();
    let out = solve_multi_oma(&ms);
    let best = out.eps_target.ln();
    let gains = [40.0, 20.0, 10.0];
    let mut rng = common::rng(11);
    let mut tried = 0;
    while tried < 100_000 {
        // random composition of 80 into four positive parts
        let mut cuts = [0u32; 3];
        for c in &mut cuts {
            *c = rng.gen_range(1..80);
        }
        cuts.sort_unstable();
        if cuts[0] == cuts[1] || cuts[1] == cuts[2] {
            continue;
        }
        tried += 1;
        let m = [cuts[0], cuts[1] - cuts[0], cuts[2] - cuts[1], 80 - cuts[2]];
        let spent: f64 = (0..3).map(|k| g(m[k] as f64, gains[k])).sum();
        let p_k = (60.0 - spent) / m[3] as f64;
        if p_k <= 0.0 {
            continue;
        }
        let e = decode_error(Snr(p_k * 4.0), m[3], D, RateModel::HighSnr).unwrap();
        assert!(
            best <= e.ln() + 1e-9,
            "random {m:?} reaches {} < {best}",
            e.ln()
        );
    }
}

#[test]
fn constrained_devices_hit_their_targets() {
    let ms = four_device();
    let a = solve_multi_oma(&ms).allocation.unwrap();
    for (k, h) in [40.0, 20.0, 10.0].iter().enumerate() {
        let e = decode_error(
            Snr(a.powers[k] * h),
            a.blocklengths[k],
            D,
            RateModel::HighSnr,
        )
        .unwrap()
        .value();
        assert!((e - EPS).abs() < 1e-9 * EPS, "device {k}: {e}");
    }
}
