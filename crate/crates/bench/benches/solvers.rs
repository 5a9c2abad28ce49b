use criterion::{black_box, criterion_group, criterion_main, Criterion};
use urllc_bench::{default_scenario, tiny_scenario};
use urllc_core::fbl::{decode_error, q_tail_inv};
use urllc_core::harness::draw_fading;
use urllc_core::multi::{solve_multi_oma, MultiScenario};
use urllc_core::{cnoma, noma, oma, relay, RateModel, Snr};

fn primitives(c: &mut Criterion) {
    c.bench_function("decode_error", |b| {
        b.iter(|| decode_error(Snr(black_box(3.7)), 60, 100, RateModel::Exact))
    });
    c.bench_function("q_tail_inv_1e-9", |b| {
        b.iter(|| q_tail_inv(black_box(1e-9)))
    });
    c.bench_function("draw_fading", |b| b.iter(|| draw_fading(7, black_box(123))));
}

fn solvers(c: &mut Criterion) {
    let base = default_scenario();
    let tiny = tiny_scenario();
    c.bench_function("oma", |b| b.iter(|| oma::solve_oma(black_box(&base))));
    c.bench_function("noma", |b| b.iter(|| noma::solve_noma(black_box(&base))));
    c.bench_function("oma_multi_k2", |b| {
        let ms = MultiScenario::from_two_device(&base).unwrap();
        b.iter(|| solve_multi_oma(black_box(&ms)))
    });

    let mut slow = c.benchmark_group("two_phase");
    slow.sample_size(10);
    slow.bench_function("relay", |b| b.iter(|| relay::solve_relay(black_box(&base))));
    slow.bench_function("cnoma", |b| b.iter(|| cnoma::solve_cnoma(black_box(&base))));
    slow.bench_function("relay_tiny", |b| {
        b.iter(|| relay::solve_relay(black_box(&tiny)))
    });
    slow.bench_function("cnoma_tiny", |b| {
        b.iter(|| cnoma::solve_cnoma(black_box(&tiny)))
    });
    slow.finish();
}

criterion_group!(benches, primitives, solvers);
criterion_main!(benches);
