use hbl_core::model::*;
use hbl_core::numerics::{Cplx, Real};
use proptest::prelude::*;

const P: u32 = 256;

fn r(v: f64) -> Real {
    Real::from_f64(v, P)
}

fn cfg(a: (f64, f64), b: (f64, f64), p1: f64, temp: f64) -> BrownianConfig {
    BrownianConfig::new([r(a.0), r(a.1)], [r(b.0), r(b.1)], [r(p1), Real::one(P) - r(p1)], Temperature::Fixed(r(temp))).unwrap()
}

/// Critical configuration: `b1 - b2` chosen so that `(a1-a2)(b1-b2) = (√p1+√p2)²`.
fn critical(p1: f64, a: (f64, f64), b2: f64) -> BrownianConfig {
    let p = [r(p1), Real::one(P) - r(p1)];
    let sp2 = (p[0].sqrt() + p[1].sqrt()).sqr();
    let da = r(a.0) - r(a.1);
    let db = sp2 / da;
    BrownianConfig::new([r(a.0), r(a.1)], [r(b2) + db, r(b2)], p, Temperature::Fixed(Real::one(P))).unwrap()
}

#[test]
fn example_regimes() {
    let c = classify_separation(&cfg((1.0, -1.0), (0.7, -0.7), 0.5, 1.0)).unwrap();
    assert_eq!(c.regime, Regime::Large);
    let c = classify_separation(&cfg((0.4, -0.4), (0.3, -0.3), 0.5, 1.0)).unwrap();
    assert_eq!(c.regime, Regime::Small);
    let c = classify_separation(&cfg((1.0, -1.0), (0.5, -0.5), 0.5, 1.0)).unwrap();
    assert_eq!(c.regime, Regime::Critical);
    assert!((c.t_crit - Real::ratio(2, 3, P)).abs() < 1e-70);
}

#[test]
fn classification_flips_around_critical_temperature() {
    let base = cfg((1.3, -0.2), (0.9, -0.4), 0.3, 1.0);
    let tc = classify_separation(&base).unwrap().temperature_crit;
    let at = |f: f64| {
        let mut c = base.clone();
        c.temperature = Temperature::Fixed(&tc * f);
        classify_separation(&c).unwrap().regime
    };
    assert_eq!(at(1.0 - 1e-3), Regime::Large);
    assert_eq!(at(1.0), Regime::Critical);
    assert_eq!(at(1.0 + 1e-3), Regime::Small);
}

#[test]
fn fig3_endpoints() {
    let c = cfg((1.0, -1.0), (1.0, -1.0), 0.5, 1.0);
    let t = Real::ratio(1, 3, P);
    let (a1, b1) = ellipse_endpoints(&c, &t, 0, false).unwrap();
    let (a2, b2) = ellipse_endpoints(&c, &t, 1, false).unwrap();
    assert!((a1.to_f64() - 0.33).abs() < 0.01 && (b1.to_f64() - 1.66).abs() < 0.01);
    assert!((a2.to_f64() + 1.66).abs() < 0.01 && (b2.to_f64() + 0.33).abs() < 0.01);
}

#[test]
fn endpoints_collapse_at_the_ends() {
    let c = cfg((1.0, -0.5), (0.2, -2.0), 0.4, 1.3);
    let eps = Real::exp2i(-100, P);
    for (t, want) in [(eps.clone(), &c.a), (Real::one(P) - &eps, &c.b)] {
        for j in 0..2 {
            let (al, be) = ellipse_endpoints(&c, &t, j, false).unwrap();
            assert!((&al - &want[j]).abs() < 1e-14 && (&be - &want[j]).abs() < 1e-14);
        }
    }
}

#[test]
fn semicircle_point_values() {
    let c = cfg((1.0, -1.0), (0.7, -0.7), 0.5, 1.0);
    let t = r(0.4);
    let (al, be) = ellipse_endpoints(&c, &t, 0, false).unwrap();
    assert!(semicircle_density(&c, &t, 0, &al).unwrap().is_zero());
    let mid = (&al + &be) / 2i64;
    let want = (&be - &al) / (Real::pi(P) * 4i64 * &t * (Real::one(P) - &t));
    assert!((semicircle_density(&c, &t, 0, &mid).unwrap() - want).abs() < 1e-70);
    let outside = &be + 1e-6;
    assert!(matches!(semicircle_density(&c, &t, 0, &outside), Err(ModelError::OutOfSupport { .. })));
}

#[test]
fn fig4_phase_boundary() {
    let h = Real::ratio(1, 2, P).sqrt();
    let c = BrownianConfig::new([h.clone(), -&h], [h.clone(), -&h], [r(0.5), r(0.5)], Temperature::Fixed(r(1.0))).unwrap();
    assert!((phase_boundary(&c, &r(0.5)).unwrap() - 1.0).abs() < 1e-70);
    assert!((phase_boundary(&c, &r(0.25)).unwrap() - Real::ratio(5, 3, P)).abs() < 1e-70);
    let t = r(0.17);
    let t2 = Real::one(P) - &t;
    assert!((phase_boundary(&c, &t).unwrap() - phase_boundary(&c, &t2).unwrap()).abs() < 1e-60);
    let skew = cfg((1.0, -1.0), (1.0, -1.0), 0.3, 1.0);
    assert!(matches!(phase_boundary(&skew, &t), Err(ModelError::UnsupportedFractions)));
}

#[test]
fn large_separation_ellipses_are_disjoint() {
    let c = cfg((1.0, -1.0), (0.7, -0.7), 0.5, 1.0);
    for i in 1..=200 {
        let t = r(i as f64 / 201.0);
        let (a1, _) = ellipse_endpoints(&c, &t, 0, false).unwrap();
        let (_, b2) = ellipse_endpoints(&c, &t, 1, false).unwrap();
        assert!(a1 > b2, "t = {}", t.to_f64());
    }
}

#[test]
fn fig3_xi2_meets_xi3() {
    let c = cfg((1.0, -1.0), (1.0, -1.0), 0.5, 1.0);
    let t = Real::ratio(1, 3, P);
    let diff = |x: &Real| {
        let v = xi_at(&c, &t, &Cplx::from_real(x.clone()), false, XiMode::Full).unwrap();
        &v.xi[1].re - &v.xi[2].re
    };
    // bisection oracle on the gap (β2, α1) = (-1/3, 1/3)
    let (mut lo, mut hi) = (r(-0.33), r(0.33));
    let s_lo = diff(&lo).is_sign_negative();
    assert_ne!(s_lo, diff(&hi).is_sign_negative());
    for _ in 0..200 {
        let mid = (&lo + &hi) / 2i64;
        if diff(&mid).is_sign_negative() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let want = -(Real::from_int(2, P).sqrt() / 6i64);
    assert!((lo - want).abs() < 1e-60);
}

#[test]
fn large_separation_inequality_chain() {
    let c = cfg((1.0, -1.0), (0.7, -0.7), 0.5, 1.0);
    let t = Real::ratio(1, 3, P);
    let rep = xi_inequality_report(&c, &t).unwrap();
    assert_eq!(rep.regime, Regime::Large);
    let (_, b2) = ellipse_endpoints(&c, &t, 1, false).unwrap();
    let (a1, _) = ellipse_endpoints(&c, &t, 0, false).unwrap();
    assert!(rep.x0 > b2 && rep.x0 < a1);
    // independent re-evaluation at the witness
    let v = xi_at(&c, &t, &Cplx::from_real(rep.x0.clone()), false, XiMode::Full).unwrap();
    let x: Vec<Real> = v.xi.iter().map(|z| z.re.clone()).collect();
    assert!(x[1] >= x[2] && x[2] > x[3] && x[3] >= x[0]);
}

#[test]
fn small_separation_has_no_report() {
    let c = cfg((0.4, -0.4), (0.3, -0.3), 0.5, 1.0);
    assert!(matches!(xi_inequality_report(&c, &r(0.3)), Err(ModelError::WrongRegime { .. })));
}

#[test]
fn critical_chain_at_reference_point() {
    let c = critical(0.35, (1.2, -0.4), -0.3);
    let sep = classify_separation(&c).unwrap();
    let t = &sep.t_crit * 0.6;
    let rep = xi_inequality_report(&c, &t).unwrap();
    assert!(rep.gaps[1].abs() < 1e-25);
    assert!(rep.gaps[0] > 0.0 && rep.gaps[2] > 0.0);
    // at the critical time the two outer gaps close as well
    let rep = xi_inequality_report(&c, &sep.t_crit).unwrap();
    for g in &rep.gaps {
        assert!(g.abs() < 1e-25);
    }
}

#[test]
fn reference_point_examples() {
    let c = critical(0.5, (1.0, -1.0), -0.5);
    let rp = reference_point(&c, &Real::ratio(1, 3, P)).unwrap();
    assert!(rp.x0.abs() < 1e-60);
    let c = critical(0.27, (0.3, -1.9), 0.4);
    let t = classify_separation(&c).unwrap().t_crit * 0.5;
    let rp = reference_point(&c, &t).unwrap();
    assert!(rp.residuals.iter().all(|v| *v < 1e-25));
    let (_, b2) = ellipse_endpoints(&c, &t, 1, true).unwrap();
    let (a1, _) = ellipse_endpoints(&c, &t, 0, true).unwrap();
    assert!(rp.x0 > b2 && rp.x0 < a1);
    let large = cfg((1.0, -1.0), (0.7, -0.7), 0.5, 1.0);
    assert!(matches!(reference_point(&large, &t), Err(ModelError::WrongRegime { .. })));
}

#[test]
fn big_xi_ordering_before_critical_time() {
    let c = critical(0.4, (0.8, -1.1), 0.2);
    let tc = classify_separation(&c).unwrap().t_crit;
    for k in 1..=10 {
        let t = &tc * (k as f64 / 10.0);
        let v = xi_at(&c, &t, &Cplx::from_f64(0.0, 1.0, P), true, XiMode::Full).unwrap();
        assert!(v.big_xi[1] >= &v.big_xi[0] - &Real::exp2i(-200, P));
    }
}

#[test]
fn xi_grows_like_z_at_infinity() {
    let c = cfg((1.0, -1.0), (0.7, -0.7), 0.5, 1.0);
    let t = r(0.3);
    let scale = 1.0 / (2.0 * 0.3 * 0.7);
    for (x, y) in [(1e12, 0.0), (-1e12, 0.0), (0.0, 1e12), (0.0, -1e12), (-7e11, -7e11)] {
        let z = Cplx::from_f64(x, y, P);
        let v = xi_at(&c, &t, &z, false, XiMode::Full).unwrap();
        let ratio = &(&v.xi[0] - &Cplx::from_real(v.big_xi[0].clone())) / &z;
        let (re, im) = ratio.to_f64_pair();
        assert!((re - scale).abs() < 1e-9 && im.abs() < 1e-9, "z = ({x},{y})");
    }
}

#[test]
fn scaling_constant_examples() {
    let c = critical(0.5, (1.0, -1.0), -0.5);
    let t = Real::ratio(1, 3, P);
    let k = scaling_constants(&c, &t, &Real::zero(P)).unwrap();
    assert!((&k.k - 0.5).abs() < 1e-70);
    assert!(k.s.is_zero());
    let k1 = scaling_constants(&c, &t, &Real::one(P)).unwrap();
    assert!((&k1.s + 1.0).abs() < 1e-70);
    // a=±1, b=±1/2, t=1/3: D = (2/3)2 - (1/3)1 = 1, c = 2·4/(1/2) = 16
    assert!((&k1.c - 16.0).abs() < 1e-60);
    assert!(k1.x0_star.abs() < 1e-60);
}

#[test]
fn conformal_map_derivatives_by_finite_differences() {
    let c = critical(0.38, (1.1, -0.6), -0.2);
    let t = classify_separation(&c).unwrap().t_crit * 0.45;
    let sc = scaling_constants(&c, &t, &Real::zero(P)).unwrap();
    let x0 = sc.x0_star.clone();
    let f = |dx: f64| conformal_map_f(&c, &t, &Cplx::from_real(&x0 + dx)).unwrap();
    let (f0, _) = f(0.0);
    assert!(f0.is_zero());
    let h = 1e-8;
    let fd = (&f(h).0.re - &f(-h).0.re).to_f64() / (2.0 * h);
    let one_t = Real::one(P) - &t;
    let d = &one_t * (&c.a[0] - &c.a[1]) - &t * (&c.b[0] - &c.b[1]);
    let want = (Real::one(P) / (&sc.k * &d * 2i64)).to_f64();
    assert!((fd - want).abs() < 1e-10 * want.abs(), "fd={fd} want={want} c={}", sc.c.to_f64());
    assert!(fd > 0.0);

    let lam = |dx: f64| lambda_difference(&c, &t, &Cplx::from_real(&x0 + dx)).unwrap().re;
    let h = 1e-5;
    let third = (lam(2.0 * h) - lam(h) * 2i64 + lam(-h) * 2i64 - lam(-2.0 * h)) / (2.0 * h * h * h);
    assert!(((third - &sc.c).abs() / &sc.c).to_f64() < 1e-8);
}

#[test]
fn sn_leading_tends_to_s_at_reference_point() {
    let c = critical(0.3, (0.9, -0.9), -0.1);
    let t = classify_separation(&c).unwrap().t_crit * 0.5;
    let l = r(1.7);
    let sc = scaling_constants(&c, &t, &l).unwrap();
    let near = sn_leading(&c, &t, &l, &Cplx::from_real(&sc.x0_star + 1e-9)).unwrap();
    assert!((&near.re - &sc.s).abs() < 1e-7, "{} {}", near.re.to_f64(), sc.s.to_f64());
    let off = sn_leading(&c, &t, &l, &Cplx::new(&sc.x0_star + 0.01, r(0.01))).unwrap();
    assert!((off.re - &sc.s).abs() < 0.1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn semicircle_mass_equals_fraction(p1 in 0.1f64..0.9, a1 in 0.5f64..3.0, temp in 0.2f64..2.0, tt in 0.05f64..0.95) {
        let c = cfg((a1, -1.0), (0.4, -0.8), p1, temp);
        let t = r(tt);
        for j in 0..2 {
            let (al, be) = ellipse_endpoints(&c, &t, j, false).unwrap();
            let mid = (&al + &be) / 2i64;
            let rad = (&be - &al) / 2i64;
            // x = mid + rad·sin θ, midpoint rule in θ
            let m = 2000;
            let mut acc = Real::zero(P);
            for i in 0..m {
                let th = -std::f64::consts::FRAC_PI_2 + std::f64::consts::PI * (i as f64 + 0.5) / m as f64;
                let x = &mid + &rad * th.sin();
                acc += semicircle_density(&c, &t, j, &x).unwrap() * (&rad * th.cos());
            }
            let mass = acc * (std::f64::consts::PI / m as f64);
            prop_assert!((mass - &c.p[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn xi_sums_are_constant(re in -5.0f64..5.0, im in -5.0f64..5.0, tt in 0.05f64..0.95) {
        prop_assume!(im.abs() > 1e-3);
        let c = cfg((1.0, -0.3), (0.6, -1.2), 0.45, 0.8);
        let v = xi_at(&c, &r(tt), &Cplx::from_f64(re, im, P), false, XiMode::Full).unwrap();
        let s1 = &v.xi[0] + &v.xi[2] - Cplx::from_real(&v.big_xi[0] * 2i64);
        let s2 = &v.xi[1] + &v.xi[3] - Cplx::from_real(&v.big_xi[1] * 2i64);
        prop_assert!(s1.abs() < 1e-28 && s2.abs() < 1e-28);
    }

    #[test]
    fn critical_identities_hold(p1 in 0.15f64..0.85, a1 in 0.2f64..2.0, a2 in -2.0f64..0.0, b2 in -1.0f64..1.0, frac in 0.05f64..0.95) {
        let c = critical(p1, (a1, a2), b2);
        prop_assert_eq!(classify_separation(&c).unwrap().regime, Regime::Critical);
        let t = classify_separation(&c).unwrap().t_crit * frac;
        let rp = reference_point(&c, &t).unwrap();
        prop_assert!(rp.residuals.iter().all(|v| *v < 1e-25));
    }
}
