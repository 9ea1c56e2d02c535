//! Extended-precision complex scalar as a pair of [`Real`]s.

use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use super::real::Real;

#[derive(Clone, PartialEq)]
pub struct Cplx {
    pub re: Real,
    pub im: Real,
}

impl Cplx {
    pub fn new(re: Real, im: Real) -> Self {
        Cplx { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        Cplx::new(Real::zero(prec), Real::zero(prec))
    }

    pub fn one(prec: u32) -> Self {
        Cplx::new(Real::one(prec), Real::zero(prec))
    }

    pub fn i(prec: u32) -> Self {
        Cplx::new(Real::zero(prec), Real::one(prec))
    }

    pub fn from_real(re: Real) -> Self {
        let p = re.prec();
        Cplx::new(re, Real::zero(p))
    }

    pub fn from_f64(re: f64, im: f64, prec: u32) -> Self {
        Cplx::new(Real::from_f64(re, prec), Real::from_f64(im, prec))
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        Cplx::new(self.re.with_prec(prec), self.im.with_prec(prec))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Cplx::new(self.re.clone(), -&self.im)
    }

    /// Multiplication by the imaginary unit.
    pub fn mul_i(&self) -> Self {
        Cplx::new(-&self.im, self.re.clone())
    }

    pub fn norm_sqr(&self) -> Real {
        self.re.sqr() + self.im.sqr()
    }

    pub fn abs(&self) -> Real {
        let p = self.prec();
        Real::from_float(rug::Float::with_val(p, self.re.as_float().hypot_ref(self.im.as_float())))
    }

    pub fn arg(&self) -> Real {
        self.im.atan2(&self.re)
    }

    pub fn recip(&self) -> Self {
        let d = self.norm_sqr();
        Cplx::new(&self.re / &d, -(&self.im / &d))
    }

    pub fn scale(&self, r: &Real) -> Self {
        Cplx::new(&self.re * r, &self.im * r)
    }

    pub fn exp(&self) -> Self {
        let m = self.re.exp();
        Cplx::new(&m * self.im.cos(), &m * self.im.sin())
    }

    pub fn ln(&self) -> Self {
        Cplx::new(self.abs().ln(), self.arg())
    }

    /// Principal square root (branch cut on the negative real axis).
    pub fn sqrt(&self) -> Self {
        let p = self.prec();
        if self.is_zero() {
            return Cplx::zero(p);
        }
        let r = self.abs();
        let half = Real::ratio(1, 2, p);
        let a = ((&r + self.re.abs()) * &half).sqrt();
        if !self.re.is_sign_negative() {
            let b = &self.im / (&a * 2i64);
            Cplx::new(a, b)
        } else {
            let b = self.im.abs() / (&a * 2i64);
            let a_signed = if self.im.is_sign_negative() { -a } else { a };
            Cplx::new(b, a_signed)
        }
    }

    /// Principal cube root via polar form.
    pub fn cbrt(&self) -> Self {
        let p = self.prec();
        if self.is_zero() {
            return Cplx::zero(p);
        }
        let r = self.abs().cbrt();
        let th = self.arg() / 3i64;
        Cplx::new(&r * th.cos(), &r * th.sin())
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut acc = Cplx::one(self.prec());
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

impl fmt::Debug for Cplx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?} + {:?}i)", self.re, self.im)
    }
}

impl From<Real> for Cplx {
    fn from(r: Real) -> Self {
        Cplx::from_real(r)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident, $rhs:ty) => {
        impl $tr<$rhs> for Cplx {
            type Output = Cplx;
            fn $m(self, rhs: $rhs) -> Cplx {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&$rhs> for Cplx {
            type Output = Cplx;
            fn $m(self, rhs: &$rhs) -> Cplx {
                (&self).$m(rhs)
            }
        }
        impl $tr<$rhs> for &Cplx {
            type Output = Cplx;
            fn $m(self, rhs: $rhs) -> Cplx {
                self.$m(&rhs)
            }
        }
    };
}

impl Add<&Cplx> for &Cplx {
    type Output = Cplx;
    fn add(self, rhs: &Cplx) -> Cplx {
        Cplx::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub<&Cplx> for &Cplx {
    type Output = Cplx;
    fn sub(self, rhs: &Cplx) -> Cplx {
        Cplx::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul<&Cplx> for &Cplx {
    type Output = Cplx;
    fn mul(self, rhs: &Cplx) -> Cplx {
        Cplx::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Div<&Cplx> for &Cplx {
    type Output = Cplx;
    fn div(self, rhs: &Cplx) -> Cplx {
        let d = rhs.norm_sqr();
        Cplx::new(
            (&self.re * &rhs.re + &self.im * &rhs.im) / &d,
            (&self.im * &rhs.re - &self.re * &rhs.im) / &d,
        )
    }
}

impl Add<&Real> for &Cplx {
    type Output = Cplx;
    fn add(self, rhs: &Real) -> Cplx {
        Cplx::new(&self.re + rhs, self.im.clone())
    }
}

impl Sub<&Real> for &Cplx {
    type Output = Cplx;
    fn sub(self, rhs: &Real) -> Cplx {
        Cplx::new(&self.re - rhs, self.im.clone())
    }
}

impl Mul<&Real> for &Cplx {
    type Output = Cplx;
    fn mul(self, rhs: &Real) -> Cplx {
        self.scale(rhs)
    }
}

impl Div<&Real> for &Cplx {
    type Output = Cplx;
    fn div(self, rhs: &Real) -> Cplx {
        Cplx::new(&self.re / rhs, &self.im / rhs)
    }
}

forward_owned!(Add, add, Cplx);
forward_owned!(Sub, sub, Cplx);
forward_owned!(Mul, mul, Cplx);
forward_owned!(Div, div, Cplx);
forward_owned!(Add, add, Real);
forward_owned!(Sub, sub, Real);
forward_owned!(Mul, mul, Real);
forward_owned!(Div, div, Real);

impl Mul<f64> for &Cplx {
    type Output = Cplx;
    fn mul(self, rhs: f64) -> Cplx {
        Cplx::new(&self.re * rhs, &self.im * rhs)
    }
}

impl Mul<f64> for Cplx {
    type Output = Cplx;
    fn mul(self, rhs: f64) -> Cplx {
        (&self) * rhs
    }
}

impl Mul<i64> for &Cplx {
    type Output = Cplx;
    fn mul(self, rhs: i64) -> Cplx {
        Cplx::new(&self.re * rhs, &self.im * rhs)
    }
}

impl Mul<i64> for Cplx {
    type Output = Cplx;
    fn mul(self, rhs: i64) -> Cplx {
        (&self) * rhs
    }
}

impl Neg for Cplx {
    type Output = Cplx;
    fn neg(self) -> Cplx {
        Cplx::new(-self.re, -self.im)
    }
}

impl Neg for &Cplx {
    type Output = Cplx;
    fn neg(self) -> Cplx {
        Cplx::new(-&self.re, -&self.im)
    }
}

macro_rules! cplx_assign {
    ($atr:ident, $am:ident, $m:ident) => {
        impl $atr<&Cplx> for Cplx {
            fn $am(&mut self, rhs: &Cplx) {
                *self = (&*self).$m(rhs);
            }
        }
        impl $atr<Cplx> for Cplx {
            fn $am(&mut self, rhs: Cplx) {
                *self = (&*self).$m(&rhs);
            }
        }
    };
}

cplx_assign!(AddAssign, add_assign, add);
cplx_assign!(SubAssign, sub_assign, sub);
cplx_assign!(MulAssign, mul_assign, mul);
cplx_assign!(DivAssign, div_assign, div);

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Cplx, b: &Cplx, tol: f64) -> bool {
        (a - b).abs() < tol
    }

    #[test]
    fn sqrt_is_principal_and_squares_back() {
        let p = 256;
        for (re, im) in [(3.0, 4.0), (-3.0, 4.0), (-3.0, -4.0), (-2.0, 0.0), (0.5, -0.25)] {
            let z = Cplx::from_f64(re, im, p);
            let s = z.sqrt();
            assert!(close(&(&s * &s), &z, 1e-70));
            assert!(!s.re.is_sign_negative());
        }
        let s = Cplx::from_f64(-4.0, 0.0, p).sqrt();
        assert!(close(&s, &Cplx::from_f64(0.0, 2.0, p), 1e-70));
    }

    #[test]
    fn cbrt_and_division() {
        let p = 256;
        let z = Cplx::from_f64(1.0, -2.0, p);
        let c = z.cbrt();
        assert!(close(&c.powi(3), &z, 1e-70));
        let w = Cplx::from_f64(0.3, 0.7, p);
        assert!(close(&(&(&z / &w) * &w), &z, 1e-70));
        assert!(close(&(&z * &z.recip()), &Cplx::one(p), 1e-70));
    }

    #[test]
    fn exp_of_i_pi_is_minus_one() {
        let p = 256;
        let z = Cplx::new(Real::zero(p), Real::pi(p));
        assert!(close(&z.exp(), &Cplx::from_f64(-1.0, 0.0, p), 1e-70));
    }
}
