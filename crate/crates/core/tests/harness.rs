mod common;

use urllc_core::fbl::normalized_gain;
use urllc_core::harness::{
    availability_hits, build_scenario, draw_fading, emit_availability_csv, emit_csv,
    network_availability, run_sweep, solve_scenario, SchemeKind, SweepConfig, SweepParam, Template,
};
use urllc_core::ChannelModel;

fn avail_template() -> Template {
    Template {
        energy_joule: 5e-4,
        ..Template::default()
    }
}

#[test]
fn energy_and_gain_follow_the_channel_model() {
    let ch = ChannelModel::default();
    let s = build_scenario(&ch, &Template::default(), None).unwrap();
    assert!((s.energy_budget() - 50.0).abs() < 1e-12);
    // 35.3 + 37.6·log10(500) dB of loss over -143 dBW of noise; the
    // exponent is rounded to three decimals
    let want = 10f64.powf(-13.678) / 10f64.powf(-14.3);
    assert!((s.h2() / want - 1.0).abs() < 5e-4, "h2 = {}", s.h2());
    assert_eq!(s.h1(), normalized_gain(&ch, 200.0, 1.0));
}

#[test]
fn same_draw_gives_same_scenario() {
    let ch = ChannelModel::default();
    let f = draw_fading(99, 5);
    let a = build_scenario(&ch, &avail_template(), Some(&f)).unwrap();
    let b = build_scenario(&ch, &avail_template(), Some(&draw_fading(99, 5))).unwrap();
    assert_eq!(a, b);
}

#[test]
fn fading_has_unit_mean() {
    let n = 100_000;
    let (mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let f = draw_fading(3, i);
        assert!(f.g1 > 0.0 && f.g2 > 0.0 && f.g3 > 0.0);
        s1 += f.g1;
        s2 += f.g2;
        s3 += f.g3;
    }
    for s in [s1, s2, s3] {
        assert!((s / n as f64 - 1.0).abs() < 0.01, "mean {}", s / n as f64);
    }
}

#[test]
fn fading_passes_kolmogorov_smirnov() {
    let n = 10_000;
    for pick in 0..3 {
        let mut x: Vec<f64> = (0..n)
            .map(|i| {
                let f = draw_fading(17, i);
                [f.g1, f.g2, f.g3][pick]
            })
            .collect();
        x.sort_by(f64::total_cmp);
        let stat = x
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let cdf = 1.0 - (-v).exp();
                (cdf - i as f64 / n as f64).max((i + 1) as f64 / n as f64 - cdf)
            })
            .fold(0.0, f64::max);
        assert!(stat < 1.358 / (n as f64).sqrt(), "link {pick}: D = {stat}");
    }
}

#[test]
fn one_point_sweep_equals_direct_solve() {
    let cfg = SweepConfig {
        schemes: SchemeKind::TWO_DEVICE.to_vec(),
        param: SweepParam::M,
        values: vec![80.0],
        template: Template::default(),
        channel: ChannelModel::default(),
    };
    let rows = run_sweep(&cfg).unwrap();
    let s = build_scenario(
        &cfg.channel,
        &Template {
            budget_symbols: 80,
            ..Template::default()
        },
        None,
    )
    .unwrap();
    for row in rows {
        assert_eq!(row.summary, solve_scenario(row.summary.scheme, &s));
    }
}

#[test]
fn sweep_records_infeasible_rows() {
    let cfg = SweepConfig {
        schemes: vec![SchemeKind::Relay],
        param: SweepParam::D1,
        values: vec![400.0, 450.0],
        template: Template::default(),
        channel: ChannelModel::default(),
    };
    let text = String::from_utf8(emit_csv(&run_sweep(&cfg).unwrap())).unwrap();
    for line in text.lines().skip(1) {
        assert!(line.ends_with(",false,,,,,,,1e0,0,"), "{line}");
    }
}

#[test]
fn vacuous_target_counts_feasible_draws() {
    let ch = ChannelModel::default();
    let t = avail_template();
    let schemes = [SchemeKind::Oma, SchemeKind::Noma];
    let reports = network_availability(&schemes, &t, &ch, 200, 5, 1.0).unwrap();
    for (j, r) in reports.iter().enumerate() {
        let feasible = (0..200)
            .filter(|&i| {
                let s = build_scenario(&ch, &t, Some(&draw_fading(5, i))).unwrap();
                solve_scenario(schemes[j], &s).feasible
            })
            .count() as u64;
        assert_eq!(r.n_available, feasible);
        assert_eq!(r.fraction, feasible as f64 / 200.0);
    }
}

#[test]
fn availability_falls_with_the_target() {
    let ch = ChannelModel::default();
    let t = avail_template();
    let schemes = SchemeKind::TWO_DEVICE;
    let mut prev: Option<Vec<f64>> = None;
    for target in [1.0, 1e-3, 1e-9] {
        let r = network_availability(&schemes, &t, &ch, 12, 8, target).unwrap();
        let f: Vec<f64> = r.iter().map(|x| x.fraction).collect();
        if let Some(p) = &prev {
            assert!(f.iter().zip(p).all(|(a, b)| a <= b), "{f:?} vs {p:?}");
        }
        prev = Some(f);
    }
}

#[test]
fn doubling_draws_keeps_the_prefix() {
    let ch = ChannelModel::default();
    let t = avail_template();
    let schemes = [SchemeKind::Oma, SchemeKind::Noma];
    let short = availability_hits(&schemes, &t, &ch, 0..100, 21, 1e-9).unwrap();
    let long = availability_hits(&schemes, &t, &ch, 0..200, 21, 1e-9).unwrap();
    assert_eq!(short[..], long[..100]);
}

#[test]
fn multi_device_scheme_is_rejected_in_availability() {
    let err = network_availability(
        &[SchemeKind::OmaMulti],
        &avail_template(),
        &ChannelModel::default(),
        10,
        1,
        1e-9,
    );
    assert!(err.is_err());
}

#[test]
fn output_is_independent_of_thread_count() {
    let cfg = SweepConfig {
        schemes: SchemeKind::ALL.to_vec(),
        param: SweepParam::M,
        values: vec![50.0, 70.0, 90.0],
        template: Template::default(),
        channel: ChannelModel::default(),
    };
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            let sweep = emit_csv(&run_sweep(&cfg).unwrap());
            let avail = emit_availability_csv(
                &network_availability(
                    &SchemeKind::TWO_DEVICE,
                    &avail_template(),
                    &cfg.channel,
                    6,
                    4,
                    1e-9,
                )
                .unwrap(),
            );
            (sweep, avail)
        })
    };
    let one = run(1);
    assert_eq!(one, run(4));
    let concurrent: Vec<_> = std::thread::scope(|sc| {
        let handles: Vec<_> = (0..2).map(|_| sc.spawn(|| run(2))).collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    assert!(concurrent.iter().all(|c| *c == one));
}
