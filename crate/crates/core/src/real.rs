//! Scalar backends for the quadrature engine.
//!
//! The integrator is generic over [`Real`], which is implemented for `f64`
//! (fast path) and for [`BigReal`], a software floating-point number with a
//! run-time selectable mantissa length.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::BigInt;
use num_rational::BigRational;

const RM: RoundingMode = RoundingMode::ToEven;

/// Bits per decimal digit.
pub const BITS_PER_DIGIT: f64 = std::f64::consts::LOG2_10;

/// Converts decimal digits to a mantissa length in bits.
pub fn digits_to_bits(digits: u32) -> usize {
    (f64::from(digits) * BITS_PER_DIGIT).ceil() as usize
}

/// Real scalar with the elementary functions needed by the radial integrals.
pub trait Real:
    Clone
    + Send
    + Sync
    + fmt::Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Whatever a constant needs to know to be created (mantissa length).
    type Context: Copy + Send + Sync + fmt::Debug;

    fn context_for_digits(digits: u32) -> Self::Context;
    fn context(&self) -> Self::Context;
    /// Mantissa length in bits.
    fn precision_bits(ctx: Self::Context) -> usize;

    fn from_f64(ctx: Self::Context, x: f64) -> Self;
    fn from_big(ctx: Self::Context, x: &BigReal) -> Self;
    fn to_f64(&self) -> f64;

    fn abs(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn atan(&self) -> Self;
    fn pi(ctx: Self::Context) -> Self;

    fn zero(ctx: Self::Context) -> Self {
        Self::from_f64(ctx, 0.0)
    }

    fn one(ctx: Self::Context) -> Self {
        Self::from_f64(ctx, 1.0)
    }

    fn is_zero(&self) -> bool {
        self.to_f64() == 0.0
    }

    fn mul_f64(&self, k: f64) -> Self {
        self.clone() * Self::from_f64(self.context(), k)
    }

    /// Four-quadrant arctangent of `self / x`.
    fn atan2(&self, x: &Self) -> Self {
        let ctx = self.context();
        let zero = Self::zero(ctx);
        let y_neg = *self < zero;
        match x.partial_cmp(&zero) {
            Some(Ordering::Greater) => (self.clone() / x.clone()).atan(),
            Some(Ordering::Less) => {
                let base = (self.clone() / x.clone()).atan();
                if y_neg {
                    base - Self::pi(ctx)
                } else {
                    base + Self::pi(ctx)
                }
            }
            _ => {
                if self.is_zero() {
                    zero
                } else if y_neg {
                    -(Self::pi(ctx).mul_f64(0.5))
                } else {
                    Self::pi(ctx).mul_f64(0.5)
                }
            }
        }
    }
}

impl Real for f64 {
    type Context = ();

    fn context_for_digits(_digits: u32) {}

    fn context(&self) {}

    fn precision_bits(_ctx: ()) -> usize {
        f64::MANTISSA_DIGITS as usize
    }

    fn from_f64(_ctx: (), x: f64) -> f64 {
        x
    }

    fn from_big(_ctx: (), x: &BigReal) -> f64 {
        x.to_f64()
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn abs(&self) -> f64 {
        f64::abs(*self)
    }

    fn sqrt(&self) -> f64 {
        f64::sqrt(*self)
    }

    fn exp(&self) -> f64 {
        f64::exp(*self)
    }

    fn ln(&self) -> f64 {
        f64::ln(*self)
    }

    fn sin(&self) -> f64 {
        f64::sin(*self)
    }

    fn cos(&self) -> f64 {
        f64::cos(*self)
    }

    fn atan(&self) -> f64 {
        f64::atan(*self)
    }

    fn pi(_ctx: ()) -> f64 {
        std::f64::consts::PI
    }

    fn atan2(&self, x: &f64) -> f64 {
        f64::atan2(*self, *x)
    }
}

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constants cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|cc| f(&mut cc.borrow_mut()))
}

/// Mantissa length of a [`BigReal`], in bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bits(pub usize);

/// Arbitrary-precision real number.
///
/// Binary operations are carried out at the larger precision of the two
/// operands.
#[derive(Clone)]
pub struct BigReal {
    v: BigFloat,
    bits: usize,
}

impl BigReal {
    pub fn with_bits(bits: usize, x: f64) -> Self {
        BigReal { v: BigFloat::from_f64(x, bits), bits }
    }

    pub fn from_bigint(bits: usize, x: &BigInt) -> Self {
        let (sign, digits) = x.to_u64_digits();
        let radix = BigFloat::from_f64(18_446_744_073_709_551_616.0, bits);
        let mut acc = BigFloat::from_f64(0.0, bits);
        for d in digits.iter().rev() {
            acc = acc.mul(&radix, bits, RM).add(&BigFloat::from_u64(*d, bits), bits, RM);
        }
        if sign == num_bigint::Sign::Minus {
            acc = acc.neg();
        }
        BigReal { v: acc, bits }
    }

    pub fn from_ratio(bits: usize, x: &BigRational) -> Self {
        BigReal::from_bigint(bits, x.numer()) / BigReal::from_bigint(bits, x.denom())
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    /// Decimal rendering at full precision.
    pub fn to_decimal_string(&self) -> String {
        with_consts(|cc| self.v.format(astro_float::Radix::Dec, RM, cc))
            .unwrap_or_else(|_| "NaN".to_string())
    }

    fn wrap(&self, v: BigFloat) -> BigReal {
        BigReal { v, bits: self.bits }
    }
}

impl fmt::Debug for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BigReal({:e}; {} bits)", self.to_f64(), self.bits)
    }
}

impl PartialEq for BigReal {
    fn eq(&self, other: &Self) -> bool {
        self.v == other.v
    }
}

impl PartialOrd for BigReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.v.partial_cmp(&other.v)
    }
}

macro_rules! big_binop {
    ($tr:ident, $method:ident) => {
        impl $tr for BigReal {
            type Output = BigReal;
            fn $method(self, rhs: BigReal) -> BigReal {
                let bits = self.bits.max(rhs.bits);
                BigReal { v: self.v.$method(&rhs.v, bits, RM), bits }
            }
        }
    };
}

big_binop!(Add, add);
big_binop!(Sub, sub);
big_binop!(Mul, mul);
big_binop!(Div, div);

impl Neg for BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        BigReal { v: self.v.neg(), bits: self.bits }
    }
}

impl Real for BigReal {
    type Context = Bits;

    fn context_for_digits(digits: u32) -> Bits {
        Bits(digits_to_bits(digits))
    }

    fn context(&self) -> Bits {
        Bits(self.bits)
    }

    fn precision_bits(ctx: Bits) -> usize {
        ctx.0
    }

    fn from_f64(ctx: Bits, x: f64) -> Self {
        BigReal::with_bits(ctx.0, x)
    }

    fn from_big(ctx: Bits, x: &BigReal) -> Self {
        let mut v = x.v.clone();
        // Only fails for NaN/inf, which keep their value.
        let _ = v.set_precision(ctx.0, RM);
        BigReal { v, bits: ctx.0 }
    }

    fn to_f64(&self) -> f64 {
        if self.v.is_nan() {
            return f64::NAN;
        }
        if self.v.is_inf() {
            return if self.v.is_inf_pos() { f64::INFINITY } else { f64::NEG_INFINITY };
        }
        if self.v.is_zero() {
            return 0.0;
        }
        let Some((words, _, sign, exponent, _)) = self.v.as_raw_parts() else {
            return f64::NAN;
        };
        // value = 0.m * 2^exponent, most significant word last
        let n = words.len();
        let hi = words[n - 1] as f64;
        let lo = if n > 1 { words[n - 2] as f64 } else { 0.0 };
        let mantissa = (hi + lo / 18_446_744_073_709_551_616.0) / 18_446_744_073_709_551_616.0;
        let e = exponent;
        let magnitude = if e > 1000 {
            mantissa * 2f64.powi(1000) * 2f64.powi(e - 1000)
        } else if e < -1000 {
            mantissa * 2f64.powi(-1000) * 2f64.powi(e + 1000)
        } else {
            mantissa * 2f64.powi(e)
        };
        if sign == Sign::Neg {
            -magnitude
        } else {
            magnitude
        }
    }

    fn abs(&self) -> Self {
        self.wrap(self.v.abs())
    }

    fn sqrt(&self) -> Self {
        self.wrap(self.v.sqrt(self.bits, RM))
    }

    fn exp(&self) -> Self {
        self.wrap(with_consts(|cc| self.v.exp(self.bits, RM, cc)))
    }

    fn ln(&self) -> Self {
        self.wrap(with_consts(|cc| self.v.ln(self.bits, RM, cc)))
    }

    fn sin(&self) -> Self {
        self.wrap(with_consts(|cc| self.v.sin(self.bits, RM, cc)))
    }

    fn cos(&self) -> Self {
        self.wrap(with_consts(|cc| self.v.cos(self.bits, RM, cc)))
    }

    fn atan(&self) -> Self {
        self.wrap(with_consts(|cc| self.v.atan(self.bits, RM, cc)))
    }

    fn pi(ctx: Bits) -> Self {
        BigReal { v: with_consts(|cc| cc.pi(ctx.0, RM)), bits: ctx.0 }
    }

    fn is_zero(&self) -> bool {
        self.v.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn big_to_f64_round_trips() {
        for &x in &[1.0, -2.5, 1e-300, 3.0e300, 0.1, -7.25e-3, 123456789.123] {
            let b = BigReal::with_bits(256, x);
            assert_eq!(b.to_f64(), x);
        }
        assert_eq!(BigReal::with_bits(128, 0.0).to_f64(), 0.0);
    }

    #[test]
    fn big_elementary_functions_match_f64() {
        let ctx = Bits(300);
        let x = BigReal::from_f64(ctx, 0.7);
        let close = |a: f64, b: f64| (a - b).abs() <= 4.0 * f64::EPSILON * b.abs().max(1.0);
        assert!(close(x.exp().to_f64(), 0.7f64.exp()));
        assert!(close(x.ln().to_f64(), 0.7f64.ln()));
        assert!(close(Real::sqrt(&x).to_f64(), 0.7f64.sqrt()));
        assert!(close(x.sin().to_f64(), 0.7f64.sin()));
        assert!(close(x.cos().to_f64(), 0.7f64.cos()));
        assert!(close(x.atan().to_f64(), 0.7f64.atan()));
        assert!(close(BigReal::pi(ctx).to_f64(), std::f64::consts::PI));
    }

    #[test]
    fn atan2_quadrants() {
        let ctx = Bits(128);
        for &(y, x) in &[(1.0, 1.0), (1.0, -1.0), (-1.0, -1.0), (-1.0, 1.0), (0.0, -2.0), (3.0, 0.0), (-3.0, 0.0)] {
            let got = BigReal::from_f64(ctx, y).atan2(&BigReal::from_f64(ctx, x)).to_f64();
            assert!((got - f64::atan2(y, x)).abs() < 1e-15, "atan2({y}, {x}) = {got}");
        }
    }

    #[test]
    fn extended_precision_is_real() {
        // (1 + 2^-100) - 1 vanishes in f64 but not at 256 bits
        let ctx = Bits(256);
        let tiny = BigReal::from_f64(ctx, 2f64.powi(-100));
        let one = BigReal::one(ctx);
        let diff = (one.clone() + tiny) - one;
        assert_eq!(diff.to_f64(), 2f64.powi(-100));
    }

    #[test]
    fn bigint_conversion() {
        let big: BigInt = "123456789012345678901234567890".parse().unwrap();
        let b = BigReal::from_bigint(256, &big);
        assert!((b.to_f64() / 1.2345678901234568e29 - 1.0).abs() < 1e-15);
        let neg = BigReal::from_bigint(256, &(-big));
        assert!(neg.to_f64() < 0.0);
    }
}
