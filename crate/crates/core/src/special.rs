use num_bigint::BigUint;

use crate::real::{BigReal, Real};

/// ln(n!) in double precision.
pub(crate) fn ln_factorial(n: u32) -> f64 {
    libm::lgamma(f64::from(n) + 1.0)
}

/// ln(n!) at the precision of `ctx`, exact up to the final logarithm.
pub(crate) fn ln_factorial_in<R: Real>(ctx: R::Context, n: u32) -> R {
    if R::precision_bits(ctx) <= f64::MANTISSA_DIGITS as usize {
        return R::from_f64(ctx, ln_factorial(n));
    }
    let fact: BigUint = (1..=n).map(BigUint::from).product();
    let bits = R::precision_bits(ctx) + 32;
    R::from_big(ctx, &BigReal::from_bigint(bits, &fact.into()).ln())
}
