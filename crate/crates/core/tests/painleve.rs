mod common;

use std::sync::OnceLock;

use common::{hastings_mcleod_shooting, mpfr_airy};
use hbl_core::painleve::*;
use hbl_core::numerics::Real;
use proptest::prelude::*;

fn solution() -> &'static HmlSolution {
    static SOL: OnceLock<HmlSolution> = OnceLock::new();
    SOL.get_or_init(|| solve_hastings_mcleod(-10.0, 10.0, 1e-12).unwrap())
}

fn r(v: f64) -> Real {
    Real::from_f64(v, solution().prec())
}

fn q_at(s: f64) -> f64 {
    evaluate_q(solution(), &r(s)).unwrap().0.to_f64()
}

#[test]
fn residual_meets_tolerance_on_and_off_the_grid() {
    let sol = solution();
    assert!(sol.residual < 1e-12, "{}", sol.residual);
    for i in 0..=200 {
        let s = -10.0 + 0.1 * i as f64 + 0.0137;
        if s < 10.0 {
            assert!(sol.residual_at(&r(s)).unwrap() < 1e-11, "s = {s}");
        }
    }
}

#[test]
fn matches_shooting_oracle() {
    let stops = [4.0, 2.0, 0.0];
    let shot = hastings_mcleod_shooting(12.0, &stops, 1e-15);
    for (s, (q, qp)) in stops.iter().zip(shot) {
        let (cq, cqp) = evaluate_q(solution(), &r(*s)).unwrap();
        assert!((cq.to_f64() - q).abs() < 1e-10, "q({s}): {cq} vs {q}");
        assert!((cqp.to_f64() - qp).abs() < 1e-10, "q'({s}): {cqp} vs {qp}");
    }
}

#[test]
fn known_value_at_zero() {
    // widely tabulated Hastings–McLeod data
    assert!((q_at(0.0) - 0.3670615515480784).abs() < 1e-12);
    let qp = evaluate_q(solution(), &r(0.0)).unwrap().1.to_f64();
    assert!((qp + 0.2953721054475501).abs() < 1e-12);
}

#[test]
fn follows_airy_on_the_right() {
    for i in 0..=40 {
        let s = 6.0 + 0.1 * i as f64;
        let (ai, _) = mpfr_airy(s);
        assert!((q_at(s) - ai).abs() <= 1e-8, "s = {s}");
    }
    assert!((q_at(8.0) - mpfr_airy(8.0).0).abs() < 1e-10);
}

#[test]
fn follows_square_root_on_the_left() {
    assert!((q_at(-8.0) - 2.0).abs() <= 0.05);
    // the deviation from 1 shrinks monotonically as s moves left
    let mut prev = f64::INFINITY;
    for i in 0..=40 {
        let s = -6.0 - 0.1 * i as f64;
        let ratio = q_at(s) / (-s / 2.0).sqrt();
        let dev = (ratio - 1.0).abs();
        assert!(dev < prev, "ratio not monotone at s = {s}");
        prev = dev;
    }
    // further left the ratio approaches 1 from below
    assert!(q_at(-10.0) / 5f64.sqrt() < 1.0);
}

#[test]
fn positive_on_the_grid() {
    assert!(solution().q.iter().all(|q| *q > 0.0));
}

#[test]
fn evaluation_at_nodes_is_verbatim() {
    let sol = solution();
    for j in [1, 7, sol.order / 2] {
        let (q, qp) = evaluate_q(sol, &sol.s[j]).unwrap();
        assert_eq!(q, sol.q[j]);
        assert_eq!(qp, sol.q_prime[j]);
    }
}

#[test]
fn interpolant_is_continuous() {
    for s in [-7.3, -0.2, 3.3] {
        assert!((q_at(s + 1e-4) - q_at(s)).abs() <= 1e-4);
    }
}

#[test]
fn refined_grid_agrees() {
    let fine = solve_hastings_mcleod_with(&HmlOptions { nodes: Some(320), ..HmlOptions::default() }).unwrap();
    let s = r(1.5);
    let a = evaluate_q(solution(), &s).unwrap().0;
    let b = evaluate_q(&fine, &s).unwrap().0;
    assert!((a - b).abs() < 1e-9);
}

#[test]
fn residual_falls_with_resolution() {
    let res: Vec<f64> = [48, 64, 96]
        .iter()
        .map(|&n| match solve_hastings_mcleod_with(&HmlOptions { nodes: Some(n), tol: 1e-14, ..HmlOptions::default() }) {
            Err(PainleveError::NoConvergence { residual, nodes }) if nodes == n => residual,
            other => panic!("{other:?}"),
        })
        .collect();
    assert!(res[1] < res[0] / 10.0 && res[2] < res[1] / 10.0, "{res:?}");
}

#[test]
fn hamiltonian_derivative_is_minus_q_squared() {
    let sol = solution();
    let h = 1e-5;
    for i in 0..50 {
        let s = -9.5 + 19.0 * i as f64 / 49.0;
        let up = hamiltonian_u(sol, &r(s + h)).unwrap();
        let um = hamiltonian_u(sol, &r(s - h)).unwrap();
        let du = ((up - um) / (2.0 * h)).to_f64();
        assert!((du + q_at(s).powi(2)).abs() < 1e-8, "s = {s}");
    }
}

#[test]
fn hamiltonian_at_right_end_is_airy() {
    let (ai, aip) = mpfr_airy(10.0);
    let u = hamiltonian_u(solution(), &r(10.0)).unwrap().to_f64();
    assert!((u - (aip * aip - 10.0 * ai * ai)).abs() < 1e-12);
}

#[test]
fn hamiltonian_decreases() {
    let table = solution().table();
    assert!(table.windows(2).all(|w| w[1][3] < w[0][3]));
    assert!(table.windows(2).all(|w| w[1][0] > w[0][0]));
}

#[test]
fn rejects_bad_requests() {
    assert!(matches!(solve_hastings_mcleod(-10.0, 5.0, 1e-12), Err(PainleveError::DomainTooNarrow { .. })));
    assert!(matches!(solve_hastings_mcleod(-5.0, 10.0, 1e-12), Err(PainleveError::DomainTooNarrow { .. })));
    assert!(matches!(solve_hastings_mcleod(10.0, -10.0, 1e-12), Err(PainleveError::InvalidInput(_))));
    assert!(matches!(solve_hastings_mcleod(-10.0, 10.0, 1e-16), Err(PainleveError::InvalidInput(_))));
    assert!(matches!(evaluate_q(solution(), &r(10.5)), Err(PainleveError::OutOfDomain { .. })));
    assert!(matches!(hamiltonian_u(solution(), &r(-11.0)), Err(PainleveError::OutOfDomain { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn off_grid_residual_within_ten_tol(s in -10.0f64..10.0) {
        prop_assert!(solution().residual_at(&r(s)).unwrap() <= 1e-11);
    }

    #[test]
    fn q_decreases_to_the_right(s in -9.9f64..9.9) {
        prop_assert!(q_at(s + 0.1) < q_at(s));
    }
}
