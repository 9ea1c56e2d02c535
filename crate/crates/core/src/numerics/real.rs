//! Extended-precision real scalar backed by MPFR.
//!
//! Binary operations return a value at the larger of the two operand
//! precisions, so precision is never silently lowered.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::atomic::{AtomicU32, Ordering as AtomicOrdering};

use rug::float::{Constant, Round};
use rug::ops::Pow;
use rug::Float;

/// Smallest mantissa width accepted by the library.
pub const MIN_PRECISION: u32 = 128;
/// Mantissa width used when no override is given.
pub const DEFAULT_PRECISION: u32 = 256;

static PROCESS_PRECISION: AtomicU32 = AtomicU32::new(DEFAULT_PRECISION);

/// Current process-wide default precision in bits.
pub fn default_precision() -> u32 {
    PROCESS_PRECISION.load(AtomicOrdering::Relaxed)
}

/// Set the process-wide default precision; values below [`MIN_PRECISION`] are raised.
pub fn set_default_precision(bits: u32) {
    PROCESS_PRECISION.store(clamp_precision(bits), AtomicOrdering::Relaxed);
}

/// Raise `bits` to the library floor.
pub fn clamp_precision(bits: u32) -> u32 {
    bits.max(MIN_PRECISION)
}

#[derive(Clone, PartialEq, PartialOrd)]
pub struct Real(Float);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse `{0}` as a decimal number")]
pub struct ParseRealError(pub String);

impl Real {
    pub fn zero(prec: u32) -> Self {
        Real(Float::new(prec))
    }

    pub fn one(prec: u32) -> Self {
        Real(Float::with_val(prec, 1))
    }

    pub fn from_f64(v: f64, prec: u32) -> Self {
        Real(Float::with_val(prec, v))
    }

    pub fn from_int(v: i64, prec: u32) -> Self {
        Real(Float::with_val(prec, v))
    }

    /// `num / den` rounded once.
    pub fn ratio(num: i64, den: i64, prec: u32) -> Self {
        let r = rug::Rational::from((num, den));
        Real(Float::with_val(prec, &r))
    }

    /// Parses a decimal string such as `"0.7"` or `"-1.25e-3"` directly at `prec`.
    pub fn parse(s: &str, prec: u32) -> Result<Self, ParseRealError> {
        let t = s.trim();
        Float::parse(t)
            .map(|p| Real(Float::with_val(prec, p)))
            .map_err(|_| ParseRealError(s.to_string()))
    }

    pub fn from_float(f: Float) -> Self {
        Real(f)
    }

    pub fn pi(prec: u32) -> Self {
        Real(Float::with_val(prec, Constant::Pi))
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn into_float(self) -> Float {
        self.0
    }

    pub fn prec(&self) -> u32 {
        self.0.prec()
    }

    /// Copy rounded (or widened) to `prec` bits.
    pub fn with_prec(&self, prec: u32) -> Self {
        Real(Float::with_val(prec, &self.0))
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn is_sign_negative(&self) -> bool {
        self.0.is_sign_negative() && !self.0.is_zero()
    }

    pub fn signum(&self) -> i32 {
        match self.0.cmp0() {
            Some(Ordering::Greater) => 1,
            Some(Ordering::Less) => -1,
            _ => 0,
        }
    }

    pub fn abs(&self) -> Self {
        Real(self.0.clone().abs())
    }

    pub fn sqr(&self) -> Self {
        Real(self.0.clone().square())
    }

    pub fn sqrt(&self) -> Self {
        Real(self.0.clone().sqrt())
    }

    pub fn cbrt(&self) -> Self {
        Real(self.0.clone().cbrt())
    }

    pub fn exp(&self) -> Self {
        Real(self.0.clone().exp())
    }

    pub fn ln(&self) -> Self {
        Real(self.0.clone().ln())
    }

    pub fn log2(&self) -> Self {
        Real(self.0.clone().log2())
    }

    pub fn sin(&self) -> Self {
        Real(self.0.clone().sin())
    }

    pub fn cos(&self) -> Self {
        Real(self.0.clone().cos())
    }

    pub fn atan2(&self, x: &Real) -> Self {
        let prec = self.prec().max(x.prec());
        Real(Float::with_val(prec, self.0.atan2_ref(&x.0)))
    }

    pub fn gamma(&self) -> Self {
        Real(self.0.clone().gamma())
    }

    pub fn powi(&self, k: i32) -> Self {
        Real(self.0.clone().pow(k))
    }

    pub fn powf(&self, e: &Real) -> Self {
        let prec = self.prec().max(e.prec());
        Real(Float::with_val(prec, (&self.0).pow(&e.0)))
    }

    pub fn recip(&self) -> Self {
        Real(self.0.clone().recip())
    }

    pub fn max(self, other: Real) -> Real {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Real) -> Real {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Power of two `2^e` at `prec` bits.
    pub fn exp2i(e: i32, prec: u32) -> Self {
        let mut f = Float::with_val(prec, 1);
        f <<= e;
        Real(f)
    }

    /// Round to the nearest integer (ties away from zero).
    pub fn round_to_i64(&self) -> Option<i64> {
        self.0.to_integer_round(Round::Nearest).and_then(|(i, _)| i.to_i64())
    }

    /// Exponent `e` with `2^(e-1) <= |x| < 2^e`; `None` for zero.
    pub fn exponent(&self) -> Option<i32> {
        self.0.get_exp()
    }

    /// Decimal representation with `digits` significant digits.
    pub fn to_string_digits(&self, digits: usize) -> String {
        self.0.to_string_radix(10, Some(digits))
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.to_string_radix(10, Some(24)))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(d) => write!(f, "{}", self.0.to_string_radix(10, Some(d.max(1)))),
            None => write!(f, "{}", self.0.to_string_radix(10, Some(30))),
        }
    }
}

macro_rules! real_binop {
    ($tr:ident, $m:ident, $atr:ident, $am:ident, $op:tt) => {
        impl $tr<&Real> for &Real {
            type Output = Real;
            fn $m(self, rhs: &Real) -> Real {
                let prec = self.prec().max(rhs.prec());
                Real(Float::with_val(prec, &self.0 $op &rhs.0))
            }
        }
        impl $tr<Real> for Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Real> for Real {
            type Output = Real;
            fn $m(self, rhs: &Real) -> Real {
                (&self).$m(rhs)
            }
        }
        impl $tr<Real> for &Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                self.$m(&rhs)
            }
        }
        impl $tr<f64> for &Real {
            type Output = Real;
            fn $m(self, rhs: f64) -> Real {
                Real(Float::with_val(self.prec(), &self.0 $op rhs))
            }
        }
        impl $tr<f64> for Real {
            type Output = Real;
            fn $m(self, rhs: f64) -> Real {
                (&self).$m(rhs)
            }
        }
        impl $tr<i64> for &Real {
            type Output = Real;
            fn $m(self, rhs: i64) -> Real {
                Real(Float::with_val(self.prec(), &self.0 $op rhs))
            }
        }
        impl $tr<i64> for Real {
            type Output = Real;
            fn $m(self, rhs: i64) -> Real {
                (&self).$m(rhs)
            }
        }
        impl $atr<&Real> for Real {
            fn $am(&mut self, rhs: &Real) {
                *self = (&*self).$m(rhs);
            }
        }
        impl $atr<Real> for Real {
            fn $am(&mut self, rhs: Real) {
                *self = (&*self).$m(&rhs);
            }
        }
    };
}

real_binop!(Add, add, AddAssign, add_assign, +);
real_binop!(Sub, sub, SubAssign, sub_assign, -);
real_binop!(Mul, mul, MulAssign, mul_assign, *);
real_binop!(Div, div, DivAssign, div_assign, /);

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(-self.0)
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(-self.0.clone())
    }
}

impl PartialEq<&Real> for Real {
    fn eq(&self, other: &&Real) -> bool {
        self.0 == other.0
    }
}

impl PartialOrd<&Real> for Real {
    fn partial_cmp(&self, other: &&Real) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl PartialEq<f64> for Real {
    fn eq(&self, other: &f64) -> bool {
        self.0 == *other
    }
}

impl PartialOrd<f64> for Real {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.0.partial_cmp(other)
    }
}
