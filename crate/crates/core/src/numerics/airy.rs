//! Airy function `Ai` and its derivative for real arguments.
//!
//! The Maclaurin series is summed with guard bits covering its cancellation
//! (about `exp(2ζ)` for positive `s`, `exp(ζ)` for negative `s`, where
//! `ζ = (2/3)|s|^(3/2)`). For large positive `s` the asymptotic expansion takes
//! over once its optimal remainder `exp(-2ζ)` is below the working precision.

use super::real::Real;

const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// `(Ai(s), Ai'(s))`.
pub fn airy_ai_pair(s: &Real) -> (Real, Real) {
    let prec = s.prec();
    let sf = s.to_f64();
    if sf > 0.0 && use_asymptotic(sf, prec) {
        let (scale, ai, aip) = asymptotic_scaled(s, prec);
        return (&ai * &scale, &aip * &scale);
    }
    let (ai, aip) = maclaurin(s, prec);
    (ai.with_prec(prec), aip.with_prec(prec))
}

pub fn airy_ai(s: &Real) -> Real {
    airy_ai_pair(s).0
}

pub fn airy_ai_prime(s: &Real) -> Real {
    airy_ai_pair(s).1
}

/// `exp(ζ)·Ai(s)` with `ζ = (2/3)s^(3/2)`, for `s > 0`; stays O(s^(-1/4)) for
/// arguments where `Ai` itself is astronomically small.
pub fn airy_ai_scaled(s: &Real) -> Real {
    let prec = s.prec();
    let sf = s.to_f64();
    assert!(sf > 0.0, "scaled Airy function is defined for positive arguments");
    if use_asymptotic(sf, prec) {
        let (_, ai, _) = asymptotic_scaled(s, prec);
        return ai;
    }
    let zeta = zeta_of(s);
    airy_ai(s) * zeta.exp()
}

fn zeta_of(s: &Real) -> Real {
    let prec = s.prec();
    s.sqrt() * s * Real::ratio(2, 3, prec)
}

fn use_asymptotic(s: f64, prec: u32) -> bool {
    let zeta = 2.0 / 3.0 * s.powf(1.5);
    2.0 * zeta * LOG2_E > prec as f64 + 24.0
}

fn maclaurin(s: &Real, prec: u32) -> (Real, Real) {
    let sf = s.to_f64();
    let zeta = 2.0 / 3.0 * sf.abs().powf(1.5);
    let cancel = if sf > 0.0 { 2.0 * zeta } else { zeta };
    let wp = prec + (cancel * LOG2_E).ceil() as u32 + 40;
    let s = s.with_prec(wp);
    let s3 = s.powi(3);
    let eps = Real::exp2i(-(wp as i32), wp);

    // f = sum c_k s^(3k), g = sum d_k s^(3k+1), and their derivatives
    let mut f = Real::one(wp);
    let mut g = s.clone();
    let mut fp = Real::zero(wp);
    let mut gp = Real::one(wp);
    let mut tf = Real::one(wp);
    let mut tg = s.clone();
    let mut tfp = s.sqr() / 2i64;
    let mut tgp = Real::one(wp);
    fp += &tfp;
    let mut k: i64 = 0;
    loop {
        let k3 = 3 * k;
        tf = &tf * &s3 / ((k3 + 2) * (k3 + 3));
        tg = &tg * &s3 / ((k3 + 3) * (k3 + 4));
        tgp = &tgp * &s3 / ((k3 + 1) * (k3 + 3));
        // tfp currently holds the k+1 term; advance to k+2
        tfp = &tfp * &s3 / ((k3 + 3) * (k3 + 5));
        f += &tf;
        g += &tg;
        gp += &tgp;
        fp += &tfp;
        k += 1;
        let small = |t: &Real, acc: &Real| t.abs() <= &acc.abs() * &eps || t.is_zero();
        if (k as f64) > sf.abs().powf(1.5) + 2.0
            && small(&tf, &f)
            && small(&tg, &g)
            && small(&tfp, &fp)
            && small(&tgp, &gp)
        {
            break;
        }
    }
    let (c1, c2) = origin_constants(wp);
    let ai = &c1 * &f - &c2 * &g;
    let aip = &c1 * &fp - &c2 * &gp;
    (ai, aip)
}

/// `Ai(0) = 3^(-2/3)/Γ(2/3)` and `-Ai'(0) = 3^(-1/3)/Γ(1/3)`.
fn origin_constants(prec: u32) -> (Real, Real) {
    let three = Real::from_int(3, prec);
    let c1 = three.powf(&Real::ratio(-2, 3, prec)) / Real::ratio(2, 3, prec).gamma();
    let c2 = three.powf(&Real::ratio(-1, 3, prec)) / Real::ratio(1, 3, prec).gamma();
    (c1, c2)
}

/// Returns `(exp(-ζ), exp(ζ)Ai, exp(ζ)Ai')`.
fn asymptotic_scaled(s: &Real, prec: u32) -> (Real, Real, Real) {
    let wp = prec + 16;
    let s = s.with_prec(wp);
    let zeta = zeta_of(&s);
    let inv = zeta.recip();
    let eps = Real::exp2i(-(wp as i32), wp);
    let mut u = Real::one(wp);
    let mut sum_u = Real::one(wp);
    let mut sum_v = Real::one(wp);
    let mut sign = 1i64;
    let mut pow = Real::one(wp);
    let kmax = (2.0 * zeta.to_f64()).floor() as i64;
    let mut k: i64 = 0;
    while k < kmax {
        u = &u * ((6 * k + 1) * (6 * k + 3) * (6 * k + 5)) / (216 * (k + 1) * (2 * k + 1));
        k += 1;
        sign = -sign;
        pow = &pow * &inv;
        let v = -(&u * (6 * k + 1)) / (6 * k - 1);
        let tu = &u * &pow * sign;
        let tv = &v * &pow * sign;
        sum_u += &tu;
        sum_v += &tv;
        if tu.abs() <= eps && tv.abs() <= eps {
            break;
        }
    }
    let two_sqrt_pi = Real::pi(wp).sqrt() * 2i64;
    let quarter = s.sqrt().sqrt();
    let ai = &sum_u / &(&two_sqrt_pi * &quarter);
    let aip = -(&sum_v * &quarter) / &two_sqrt_pi;
    ((-zeta).exp().with_prec(prec), ai.with_prec(prec), aip.with_prec(prec))
}
