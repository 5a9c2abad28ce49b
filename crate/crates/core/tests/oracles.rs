mod common;

use common::*;
use urllc_core::cnoma::solve_cnoma;
use urllc_core::fbl::{q_tail, q_tail_inv};
use urllc_core::noma::solve_noma;
use urllc_core::oma::solve_oma;
use urllc_core::relay::solve_relay;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn q_matches_quadrature() {
    for &x in &[-2.0, -0.5, 0.0, 0.3, 1.0, 2.5, 5.0, 7.5, 9.0, 12.0] {
        let want = q_quadrature(x);
        let got = q_tail(x).value();
        assert!(rel(got, want) < 1e-9, "Q({x}) = {got}, quadrature {want}");
    }
}

#[test]
fn q_inverse_matches_quadrature() {
    for &p in &[0.4, 0.1, 1e-3, 1e-9, 1e-15] {
        let x = q_tail_inv(p).unwrap();
        assert!(rel(q_quadrature(x), p) < 1e-8, "Q⁻¹({p}) = {x}");
    }
}

#[test]
fn oma_matches_grid_oracle() {
    let s = tiny_instance();
    let got = solve_oma(&s).eps_target.ln();
    let want = oracle_oma(&s, 10_000);
    println!("oma {got} oracle {want}");
    assert!(rel(got, want) < 1e-3);
}

#[test]
fn noma_matches_grid_oracle() {
    let s = tiny_instance();
    let got = solve_noma(&s).eps_target.ln();
    let want = oracle_noma(&s, 100_000);
    println!("noma {got} oracle {want}");
    assert!(rel(got, want) < 1e-3);
}

#[test]
fn relay_matches_grid_oracle() {
    let s = tiny_instance();
    let got = solve_relay(&s).eps_target.ln();
    let want = oracle_relay(&s, 10_000);
    println!("relay {got} oracle {want}");
    assert!(rel(got, want) < 1e-3);
}

#[test]
fn cnoma_matches_grid_oracle() {
    let s = tiny_instance();
    let got = solve_cnoma(&s).eps_target.ln();
    let want = oracle_cnoma(&s, 60);
    println!("cnoma {got} oracle {want}");
    assert!(rel(got, want) < 1e-2);
}
