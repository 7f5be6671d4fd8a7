//! Adaptive Gauss-Kronrod integration of radial integrals over [0, inf).
//!
//! The integrand is expected to carry an envelope of the form
//! `exp(-s) s^n / n!`; the upper limit is cut where that envelope drops below
//! the absolute tolerance by a configurable margin.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cplx::Cplx;
use crate::error::{HkError, Result};
use crate::kronrod::GaussKronrod15;
use crate::real::Real;
use crate::special::ln_factorial;

/// Largest occupation for which the double-precision path is allowed.
pub const FAST_PATH_MAX_N: u32 = 12;
/// Loosest relative tolerance the double-precision path will accept.
pub const FAST_PATH_MIN_REL_TOL: f64 = 1e-8;

/// Arithmetic precision and accuracy goals for one integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionConfig {
    /// Decimal digits carried by the arithmetic backend.
    pub working_digits: u32,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Extra decades by which the envelope must undercut `abs_tol` at the
    /// upper integration limit.
    pub truncation_margin: f64,
}

impl Default for PrecisionConfig {
    fn default() -> Self {
        PrecisionConfig {
            working_digits: 30,
            rel_tol: 1e-10,
            abs_tol: 1e-13,
            max_subdivisions: 20_000,
            truncation_margin: 5.0,
        }
    }
}

impl PrecisionConfig {
    /// Config for `target_digits` correct digits at occupation up to `n`,
    /// using the default working-precision policy.
    pub fn for_order(n: u32, target_digits: u32) -> Self {
        let target = target_digits.max(1);
        PrecisionConfig {
            working_digits: choose_working_digits(n, 0.0, target),
            rel_tol: 10f64.powi(-(target as i32)),
            abs_tol: 10f64.powi(-(target as i32) - 3),
            ..PrecisionConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.working_digits < 16 {
            return Err(HkError::config("working_digits", format!("{} is below 16", self.working_digits)));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(HkError::config("rel_tol", format!("{} is not a positive number", self.rel_tol)));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(HkError::config("abs_tol", format!("{} is not a positive number", self.abs_tol)));
        }
        let needed = -self.rel_tol.log10() + 10.0;
        if f64::from(self.working_digits) < needed - 1e-9 {
            return Err(HkError::config(
                "working_digits",
                format!("{} digits cannot honour rel_tol {:e}; need at least {}", self.working_digits, self.rel_tol, needed.ceil()),
            ));
        }
        if self.max_subdivisions == 0 {
            return Err(HkError::config("max_subdivisions", "must be positive"));
        }
        if !(self.truncation_margin >= 0.0 && self.truncation_margin.is_finite()) {
            return Err(HkError::config("truncation_margin", "must be a non-negative number"));
        }
        Ok(())
    }

    /// Same tolerances, with the working precision raised to what the
    /// default policy recommends at occupation `n`.
    pub fn escalated_for(&self, n: u32) -> Self {
        let target = (-self.rel_tol.log10()).ceil().max(0.0) as u32;
        PrecisionConfig { working_digits: self.working_digits.max(choose_working_digits(n, 0.0, target)), ..*self }
    }

    /// Whether an integral at occupation `n` may run in plain `f64`.
    pub fn uses_fast_path(&self, n: u32) -> bool {
        n <= FAST_PATH_MAX_N && self.rel_tol >= FAST_PATH_MIN_REL_TOL
    }
}

/// Recommended working precision in decimal digits.
///
/// Policy: `target_digits + 10 + ceil(3.5 n)`, never below 16. The
/// cancellation in the radial integrals grows with `n`, not with the time
/// span, so `tau_max` does not enter.
pub fn choose_working_digits(n: u32, _tau_max: f64, target_digits: u32) -> u32 {
    let growth = (3.5 * f64::from(n)).ceil() as u32;
    (target_digits + 10 + growth).max(16)
}

/// Outcome of a converged integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: Complex64,
    pub error_estimate: f64,
    pub subdivisions_used: usize,
    pub converged: bool,
}

/// Complex radial integrand on `s >= 0`.
pub trait RadialIntegrand<R: Real> {
    fn eval(&self, s: &R) -> Cplx<R>;

    /// Breakpoints of the starting partition of `[0, s_max]`, ascending,
    /// first 0 and last `s_max`.
    fn partition(&self, s_max: f64, _abs_tol: f64) -> Vec<f64> {
        vec![0.0, s_max]
    }
}

/// Adapter turning a closure into a [`RadialIntegrand`].
pub struct FnIntegrand<F>(pub F);

impl<R: Real, F: Fn(&R) -> Cplx<R>> RadialIntegrand<R> for FnIntegrand<F> {
    fn eval(&self, s: &R) -> Cplx<R> {
        (self.0)(s)
    }
}

/// log of the envelope `exp(-s) s^n / n!`.
pub fn log_envelope(n: u32, s: f64) -> f64 {
    if n == 0 {
        -s
    } else {
        f64::from(n) * s.ln() - s - ln_factorial(n)
    }
}

/// Upper integration limit for envelope order `n`.
pub fn truncation_point(n: u32, config: &PrecisionConfig) -> f64 {
    let nf = f64::from(n);
    let floor = config.abs_tol.ln() - config.truncation_margin * std::f64::consts::LN_10;
    let mut s_max = nf + 40.0 + 10.0 * (nf + 1.0).sqrt();
    while log_envelope(n, s_max) >= floor {
        s_max += 10.0 + 0.25 * s_max;
    }
    s_max
}

struct Panel<R> {
    a: R,
    b: R,
    value: Cplx<R>,
    error: f64,
}

impl<R> PartialEq for Panel<R> {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl<R> Eq for Panel<R> {}

impl<R> PartialOrd for Panel<R> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<R> Ord for Panel<R> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `integrand` over `[0, s_max]` with global adaptive bisection.
///
/// `decay_scale` is the envelope order `n` and fixes the truncation point.
/// Arithmetic runs in `R` at the precision given by `ctx`.
pub fn integrate_radial<R, I>(integrand: &I, decay_scale: u32, config: &PrecisionConfig, ctx: R::Context) -> Result<IntegralResult>
where
    R: Real,
    I: RadialIntegrand<R> + ?Sized,
{
    config.validate()?;
    let s_max = truncation_point(decay_scale, config);
    let breaks = integrand.partition(s_max, config.abs_tol);
    integrate_on_partition(integrand, &breaks, config, ctx)
}

/// Adaptive integration starting from the given breakpoints.
pub fn integrate_on_partition<R, I>(integrand: &I, breaks: &[f64], config: &PrecisionConfig, ctx: R::Context) -> Result<IntegralResult>
where
    R: Real,
    I: RadialIntegrand<R> + ?Sized,
{
    if breaks.len() < 2 {
        return Err(HkError::config("partition", "needs at least two breakpoints"));
    }
    let rule = GaussKronrod15::<R>::new(ctx);
    let f = |s: &R| integrand.eval(s);
    let half = R::from_f64(ctx, 0.5);

    let mut heap = BinaryHeap::with_capacity(breaks.len() * 2);
    let mut total = Cplx::zero(ctx);
    let mut total_err = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (R::from_f64(ctx, w[0]), R::from_f64(ctx, w[1]));
        let (k, g) = rule.apply(&f, &a, &b);
        let error = (k.clone() - g).abs().to_f64();
        total = total + k.clone();
        total_err += error;
        heap.push(Panel { a, b, value: k, error });
    }

    let mut subdivisions = heap.len();
    loop {
        let tolerance = (config.rel_tol * total.abs().to_f64()).max(config.abs_tol);
        if total_err <= tolerance {
            // the running sum drifts; confirm with a fresh one
            total_err = heap.iter().map(|p| p.error).sum();
            if total_err <= tolerance {
                return Ok(IntegralResult {
                    value: total.to_c64(),
                    error_estimate: total_err,
                    subdivisions_used: subdivisions,
                    converged: true,
                });
            }
        }
        let worst = heap.pop().expect("partition is never empty");
        let width = (worst.b.clone() - worst.a.clone()).to_f64();
        let scale = worst.b.to_f64().abs().max(1.0);
        if subdivisions >= config.max_subdivisions || width <= scale * 2f64.powi(-(R::precision_bits(ctx) as i32) + 8) {
            heap.push(worst);
            return Err(HkError::NonConvergence {
                value: total.to_c64(),
                error_estimate: heap.iter().map(|p| p.error).sum(),
                subdivisions,
            });
        }
        let mid = (worst.a.clone() + worst.b.clone()) * half.clone();
        let (k1, g1) = rule.apply(&f, &worst.a, &mid);
        let (k2, g2) = rule.apply(&f, &mid, &worst.b);
        let e1 = (k1.clone() - g1).abs().to_f64();
        let e2 = (k2.clone() - g2).abs().to_f64();
        total = total - worst.value + k1.clone() + k2.clone();
        total_err += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid.clone(), value: k1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: k2, error: e2 });
        subdivisions += 1;
    }
}
