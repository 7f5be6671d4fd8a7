//! Steepest-descent results for the radial integral in the scaled variable
//! `x = s / n` with `tau~ = n tau` held fixed.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{HkError, Result};
use crate::model::{exact_energy, ModelParams};
use crate::special::ln_factorial;

/// Critical points of the scaled exponent and the quantities needed for the
/// leading-order saddle-point estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleData {
    /// Dominant critical point.
    pub x0: Complex64,
    /// Critical point where the prefactor vanishes.
    pub x1: Complex64,
    pub f_at_x0: Complex64,
    pub s_at_x0: Complex64,
    pub s_second_deriv_at_x0: Complex64,
}

/// Prefactor `f(x) = exp(i tau~ x / 2) sqrt(1 - i tau~ x)`.
pub fn saddle_prefactor(tau_tilde: f64, x: Complex64) -> Complex64 {
    let i = Complex64::i();
    (0.5 * i * tau_tilde * x).exp() * (1.0 - i * tau_tilde * x).sqrt()
}

pub fn saddle_points(tau_tilde: f64) -> Result<SaddleData> {
    if tau_tilde == 0.0 || !tau_tilde.is_finite() {
        return Err(HkError::DegenerateInput(format!(
            "the second critical point 1/(i tau~) needs a finite nonzero tau~, got {tau_tilde}"
        )));
    }
    let i = Complex64::i();
    let x0 = Complex64::new(1.0, 0.0);
    let x1 = 1.0 / (i * tau_tilde);
    Ok(SaddleData {
        x0,
        x1,
        f_at_x0: saddle_prefactor(tau_tilde, x0),
        s_at_x0: -(1.0 + 0.5 * i * tau_tilde),
        s_second_deriv_at_x0: -(1.0 - i * tau_tilde),
    })
}

/// Leading-order Herman-Kluk spectrum; coincides with the exact one.
pub fn hk_spectrum_lo(params: &ModelParams, n: u32) -> f64 {
    exact_energy(params, n)
}

/// Spectrum obtained when the phase correction is dropped.
pub fn hk_spectrum_no_theta(params: &ModelParams, n: u32) -> f64 {
    let n = f64::from(n);
    params.omega_e * (n + 0.5) + 0.5 * params.interaction * n * (n + 1.0)
}

/// Phase of `g_n` with the shifted-saddle correction, `g = |g| exp(-i phi)`.
///
/// Derived for `tau~ >> 1`; no claim is made at small `tau~`.
pub fn hk_phase_nnlo(n: u32, tau: f64) -> f64 {
    let n = f64::from(n);
    0.5 * n * (n - 1.0) * tau + tau / 8.0
}

/// Frozen-Gaussian diagonal element in the semiclassical limit.
pub fn fga_closed_form(params: &ModelParams, n: u32, t: f64) -> Complex64 {
    let i = Complex64::i();
    let nf = f64::from(n);
    let u = params.interaction;
    let phase = -(nf - 0.5) * params.omega_e * t - 0.5 * u * nf * (nf - 2.0) * t;
    Complex64::from_polar(1.0, phase) / (1.0 - i * nf * u * t).sqrt()
}

/// `sqrt(2 pi n) (n/e)^n / n!`, evaluated in logs.
pub fn stirling_norm(n: u32) -> f64 {
    let nf = f64::from(n);
    (0.5 * (2.0 * std::f64::consts::PI * nf).ln() + nf * nf.ln() - nf - ln_factorial(n)).exp()
}
