//! Single-site Bose-Hubbard model: exact spectrum and the closed-form
//! classical ingredients of the Herman-Kluk propagator.
//!
//! Hamiltonian: `H = omega n + (U/2) n (n - 1)`, with `hbar = 1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{HkError, Result};
use crate::special::ln_factorial;

/// Physical parameters of the single-site model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Harmonic angular frequency.
    pub omega_e: f64,
    /// On-site interaction `U`; either sign is allowed.
    pub interaction: f64,
}

impl ModelParams {
    pub fn new(omega_e: f64, interaction: f64) -> Result<Self> {
        if !omega_e.is_finite() {
            return Err(HkError::config("omega_e", format!("{omega_e} is not finite")));
        }
        if !interaction.is_finite() {
            return Err(HkError::config("interaction", format!("{interaction} is not finite")));
        }
        Ok(ModelParams { omega_e, interaction })
    }

    /// Dimensionless anharmonic time `tau = U t`.
    pub fn tau(&self, t: f64) -> f64 {
        self.interaction * t
    }
}

/// Coherent-state label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub z: Complex64,
}

impl PhasePoint {
    pub fn new(z: Complex64) -> Self {
        PhasePoint { z }
    }

    /// Classical occupation `|z|^2`.
    pub fn occupation(&self) -> f64 {
        self.z.norm_sqr()
    }
}

impl From<Complex64> for PhasePoint {
    fn from(z: Complex64) -> Self {
        PhasePoint { z }
    }
}

/// Everything one trajectory contributes to the propagator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalIngredients {
    pub trajectory_value: Complex64,
    pub action: f64,
    pub stability_factor: Complex64,
    pub phase_correction: f64,
    pub full_prefactor: Complex64,
}

impl ClassicalIngredients {
    pub fn compute(params: &ModelParams, z0: PhasePoint, t: f64) -> Self {
        ClassicalIngredients {
            trajectory_value: classical_trajectory(params, z0, t),
            action: classical_action(params, z0, t),
            stability_factor: stability_factor(params, z0, t),
            phase_correction: phase_correction(params, z0, t),
            full_prefactor: full_prefactor(params, z0, t),
        }
    }
}

/// Mean occupation and the product `U n_bar` held fixed in the
/// semiclassical limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemiclassicalScale {
    pub n_bar: f64,
    pub u_nbar: f64,
}

impl SemiclassicalScale {
    pub fn new(params: &ModelParams, n_bar: f64) -> Result<Self> {
        if !(n_bar > 0.0 && n_bar.is_finite()) {
            return Err(HkError::config("n_bar", format!("{n_bar} must be positive")));
        }
        Ok(SemiclassicalScale { n_bar, u_nbar: params.interaction * n_bar })
    }

    /// Scaled time `tau~ = n_bar tau`.
    pub fn scaled_tau(&self, tau: f64) -> f64 {
        self.n_bar * tau
    }
}

pub fn exact_energy(params: &ModelParams, n: u32) -> f64 {
    let n = f64::from(n);
    params.omega_e * n + 0.5 * params.interaction * n * (n - 1.0)
}

/// `<n| exp(-i H t) |n>`.
pub fn exact_propagator_element(params: &ModelParams, n: u32, t: f64) -> Complex64 {
    Complex64::from_polar(1.0, -t * exact_energy(params, n))
}

pub fn classical_trajectory(params: &ModelParams, z0: PhasePoint, t: f64) -> Complex64 {
    let freq = params.omega_e + params.interaction * z0.occupation();
    Complex64::from_polar(1.0, -t * freq) * z0.z
}

pub fn classical_action(params: &ModelParams, z0: PhasePoint, t: f64) -> f64 {
    let s = z0.occupation();
    0.5 * params.interaction * t * s * s
}

/// Herman-Kluk stability factor.
///
/// `arg(1 - i U t |z0|^2)` stays inside (-pi/2, pi/2), so the principal
/// square root is continuous in `t`.
pub fn stability_factor(params: &ModelParams, z0: PhasePoint, t: f64) -> Complex64 {
    let s = z0.occupation();
    let freq = params.omega_e + params.interaction * s;
    Complex64::new(1.0, -params.interaction * t * s).sqrt() * Complex64::from_polar(1.0, -0.5 * t * freq)
}

pub fn phase_correction(params: &ModelParams, z0: PhasePoint, t: f64) -> f64 {
    (0.5 * params.omega_e + params.interaction * z0.occupation()) * t
}

/// `exp(i theta_t)` times the stability factor, in closed form.
pub fn full_prefactor(params: &ModelParams, z0: PhasePoint, t: f64) -> Complex64 {
    let ut_s = params.interaction * t * z0.occupation();
    Complex64::new(1.0, -ut_s).sqrt() * Complex64::from_polar(1.0, 0.5 * ut_s)
}

/// `<n | z>` for a normalized coherent state.
pub fn number_amplitude(z: Complex64, n: u32) -> Complex64 {
    let s = z.norm_sqr();
    if s == 0.0 {
        return if n == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
    }
    let log_mag = -0.5 * s + 0.5 * f64::from(n) * s.ln() - 0.5 * ln_factorial(n);
    Complex64::from_polar(log_mag.exp(), f64::from(n) * z.arg())
}

/// `<u | v>` for normalized coherent states.
pub fn coherent_overlap(u: Complex64, v: Complex64) -> Complex64 {
    (-0.5 * u.norm_sqr() - 0.5 * v.norm_sqr() + u.conj() * v).exp()
}
