//! Complex numbers over a generic [`Real`] backend.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::real::Real;

/// Complex number stored as a pair of reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Cplx<R> {
    pub re: R,
    pub im: R,
}

impl<R: Real> Cplx<R> {
    pub fn new(re: R, im: R) -> Self {
        Cplx { re, im }
    }

    pub fn zero(ctx: R::Context) -> Self {
        Cplx { re: R::zero(ctx), im: R::zero(ctx) }
    }

    pub fn from_c64(ctx: R::Context, z: Complex64) -> Self {
        Cplx { re: R::from_f64(ctx, z.re), im: R::from_f64(ctx, z.im) }
    }

    /// `cos(phase) + i sin(phase)`.
    pub fn cis(phase: &R) -> Self {
        Cplx { re: phase.cos(), im: phase.sin() }
    }

    pub fn conj(&self) -> Self {
        Cplx { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn norm_sqr(&self) -> R {
        self.re.clone() * self.re.clone() + self.im.clone() * self.im.clone()
    }

    pub fn abs(&self) -> R {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, k: &R) -> Self {
        Cplx { re: self.re.clone() * k.clone(), im: self.im.clone() * k.clone() }
    }

    /// Principal square root, cut along the negative real axis.
    ///
    /// Uses the form that avoids subtracting nearly equal numbers when the
    /// argument hugs the real axis.
    pub fn sqrt(&self) -> Self {
        let ctx = self.re.context();
        let zero = R::zero(ctx);
        if self.re.is_zero() && self.im.is_zero() {
            return Cplx::zero(ctx);
        }
        let r = self.abs();
        let half = R::from_f64(ctx, 0.5);
        if self.re >= zero {
            let u = ((r + self.re.clone()) * half).sqrt();
            let v = self.im.clone() / (u.clone() + u.clone());
            Cplx { re: u, im: v }
        } else {
            let mut v = ((r - self.re.clone()) * half).sqrt();
            if self.im < zero {
                v = -v;
            }
            let u = self.im.clone() / (v.clone() + v.clone());
            Cplx { re: u, im: v }
        }
    }

    pub fn exp(&self) -> Self {
        Cplx::cis(&self.im).scale(&self.re.exp())
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

impl<R: Real> Add for Cplx<R> {
    type Output = Cplx<R>;
    fn add(self, rhs: Cplx<R>) -> Cplx<R> {
        Cplx { re: self.re + rhs.re, im: self.im + rhs.im }
    }
}

impl<R: Real> Sub for Cplx<R> {
    type Output = Cplx<R>;
    fn sub(self, rhs: Cplx<R>) -> Cplx<R> {
        Cplx { re: self.re - rhs.re, im: self.im - rhs.im }
    }
}

impl<R: Real> Mul for Cplx<R> {
    type Output = Cplx<R>;
    fn mul(self, rhs: Cplx<R>) -> Cplx<R> {
        let re = self.re.clone() * rhs.re.clone() - self.im.clone() * rhs.im.clone();
        let im = self.re * rhs.im + self.im * rhs.re;
        Cplx { re, im }
    }
}

impl<R: Real> Neg for Cplx<R> {
    type Output = Cplx<R>;
    fn neg(self) -> Cplx<R> {
        Cplx { re: -self.re, im: -self.im }
    }
}
