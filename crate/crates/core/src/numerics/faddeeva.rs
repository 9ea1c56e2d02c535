//! Faddeeva function `w(z) = exp(-z^2) erfc(-iz)` at arbitrary precision.
//!
//! Upper half plane only is evaluated directly; the lower half plane uses
//! `w(z) = 2 exp(-z^2) - w(-z)`.
//!
//! Inside the crossover radius the value is assembled as
//! `exp(-z^2) + (2i/sqrt(pi)) exp(-z^2) sum z^(2m+1)/(m!(2m+1))`. The power
//! series only cancels by about `exp(2 Im(z)^2)`, which is absorbed with guard
//! bits, so it stays cheap along the real axis. Outside the radius the
//! asymptotic expansion is summed; its remainder is of order `exp(-|z|^2)` and
//! the radius is chosen so that this is below the working precision.

use super::complex::Cplx;
use super::real::Real;

const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// Crossover radius above which the asymptotic expansion is used.
pub fn crossover_radius(prec: u32) -> f64 {
    ((prec as f64 + 40.0) * std::f64::consts::LN_2).sqrt() + 0.5
}

/// `w(z)` with relative error close to `2^-prec`, `prec = z.prec()`.
pub fn faddeeva(z: &Cplx) -> Cplx {
    let prec = z.prec();
    if z.im.is_sign_negative() {
        let wp = prec + 32;
        let zz = z.with_prec(wp);
        let e = (-(&zz * &zz)).exp() * 2i64;
        return (e - faddeeva_upper(&(-zz), wp)).with_prec(prec);
    }
    faddeeva_upper(z, prec).with_prec(prec)
}

/// Derivative `w'(z) = -2 z w(z) + 2i/sqrt(pi)`.
pub fn faddeeva_derivative(z: &Cplx, w: &Cplx) -> Cplx {
    let prec = z.prec();
    let two_over_sqrt_pi = Real::from_int(2, prec) / Real::pi(prec).sqrt();
    let mut d = -(z * w) * 2i64;
    d.im += &two_over_sqrt_pi;
    d
}

fn faddeeva_upper(z: &Cplx, prec: u32) -> Cplx {
    let (x, y) = z.to_f64_pair();
    let r = x.hypot(y);
    if r > crossover_radius(prec) {
        asymptotic(z, prec)
    } else {
        series(z, prec)
    }
}

fn series(z: &Cplx, prec: u32) -> Cplx {
    let y = z.im.to_f64();
    let guard = (2.0 * y * y * LOG2_E).ceil() as u32 + 40;
    let wp = prec + guard;
    let z = z.with_prec(wp);
    let z2 = &z * &z;
    let eps = Real::exp2i(-(wp as i32), wp);

    // sum_{m} z^(2m+1) / (m! (2m+1))
    let mut power = z.clone(); // z^(2m+1)/m!
    let mut sum = z.clone();
    let mut m: i64 = 0;
    loop {
        m += 1;
        power = &(&power * &z2) / &Real::from_int(m, wp);
        let term = &power / &Real::from_int(2 * m + 1, wp);
        sum += &term;
        if m as f64 > 2.0 * z2.abs().to_f64() + 2.0 && term.abs() <= &sum.abs() * &eps {
            break;
        }
    }
    let e = (-z2).exp();
    let two_over_sqrt_pi = Real::from_int(2, wp) / Real::pi(wp).sqrt();
    let dawson = &e * &sum;
    &e + &dawson.mul_i().scale(&two_over_sqrt_pi)
}

fn asymptotic(z: &Cplx, prec: u32) -> Cplx {
    let wp = prec + 16;
    let z = z.with_prec(wp);
    let inv2z2 = (&(&z * &z) * 2i64).recip();
    let eps = Real::exp2i(-(wp as i32), wp);
    let kmax = z.norm_sqr().to_f64().floor() as i64;
    let mut term = Cplx::one(wp);
    let mut sum = Cplx::one(wp);
    let mut k: i64 = 0;
    while k < kmax {
        term = &(&term * &inv2z2) * (2 * k + 1);
        sum += &term;
        k += 1;
        if term.abs() <= &sum.abs() * &eps {
            break;
        }
    }
    let sqrt_pi = Real::pi(wp).sqrt();
    (&sum / &(&z * &sqrt_pi)).mul_i()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Cplx {
        Cplx::from_f64(re, im, 256)
    }

    fn rel(a: &Cplx, b: &Cplx) -> f64 {
        ((a - b).abs() / b.abs()).to_f64()
    }

    #[test]
    fn value_at_origin_is_one() {
        assert!(rel(&faddeeva(&c(0.0, 0.0)), &c(1.0, 0.0)) < 1e-70);
    }

    #[test]
    fn imaginary_axis_matches_scaled_erfc() {
        for y in [0.5, 2.0, 7.0, 13.0, 25.0] {
            let yy = Real::from_f64(y, 256);
            let want = yy.sqr().exp() * Real::from_float(yy.as_float().clone().erfc());
            let got = faddeeva(&c(0.0, y));
            assert!(rel(&got, &Cplx::from_real(want)) < 1e-30, "y={y}");
        }
    }

    #[test]
    fn real_axis_real_part_is_gaussian() {
        for x in [0.3, 3.0, 9.0] {
            let xx = Real::from_f64(x, 256);
            let got = faddeeva(&c(x, 0.0));
            let want = (-xx.sqr()).exp();
            assert!(((&got.re - &want).abs() / got.abs()).to_f64() < 1e-30, "x={x}");
        }
    }

    #[test]
    fn reflection_identity() {
        let z = c(1.0, 1.0);
        let lhs = &faddeeva(&z) + &faddeeva(&(-&z));
        let rhs = (-(&z * &z)).exp() * 2i64;
        assert!(rel(&lhs, &rhs) < 1e-60);
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let z = c(0.7, 0.4);
        let w = faddeeva(&z);
        let h = Real::exp2i(-60, 256);
        let zp = &z + &h;
        let zm = &z - &h;
        let fd = (&faddeeva(&zp) - &faddeeva(&zm)) / &(h.clone() * 2i64);
        assert!(rel(&fd, &faddeeva_derivative(&z, &w)) < 1e-30);
    }
}
