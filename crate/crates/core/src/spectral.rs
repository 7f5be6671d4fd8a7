//! Phase and norm observables of `g_n` along a tau grid.
//!
//! Convention: `g_n = |g_n| exp(-i phi_n)`, so a positive `phi_n` growth rate
//! is a positive energy. The residual `delta_phi = phi_n - n (n - 1) tau / 2`
//! is what remains after removing the exact anharmonic phase.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HkError, Result};
use crate::propagator::{radial_kernel, RadialKernel};
use crate::quadrature::PrecisionConfig;

/// Scaled-time window `tau~ = n tau` used for plateaus and slope fits.
pub const DEFAULT_WINDOW_TILDE: (f64, f64) = (1.0, 5.0);
/// Grid doublings attempted before giving up on unwrapping.
pub const MAX_REFINEMENTS: u32 = 6;
/// Fewest samples accepted by the slope fit.
pub const MIN_FIT_SAMPLES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseCurve {
    pub n: u32,
    pub tau_grid: Vec<f64>,
    pub values: Vec<Complex64>,
    pub modulus_sq: Vec<f64>,
    /// Continuous phase with `phase[0] = 0`.
    pub phase: Vec<f64>,
    pub delta_phi: Vec<f64>,
    /// Number of grid doublings the unwrapping needed.
    pub refinements: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateauEstimate {
    pub n: u32,
    pub r_n: f64,
    pub window: (f64, f64),
    pub spread: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub samples: usize,
}

/// Exact anharmonic phase `n (n - 1) tau / 2`.
pub fn exact_phase(n: u32, tau: f64) -> f64 {
    let n = f64::from(n);
    0.5 * n * (n - 1.0) * tau
}

/// Converts a `tau~` window into a `tau` window for occupation `n`.
pub fn scaled_window(n: u32, window_tilde: (f64, f64)) -> (f64, f64) {
    let scale = f64::from(n.max(1));
    (window_tilde.0 / scale, window_tilde.1 / scale)
}

/// Samples the Herman-Kluk `g_n` on `[0, tau_max]` and unwraps its phase.
pub fn build_phase_curve(n: u32, tau_max: f64, steps: usize, config: &PrecisionConfig) -> Result<PhaseCurve> {
    build_kernel_curve(RadialKernel::Hk, n, tau_max, steps, config)
}

/// Same as [`build_phase_curve`] for any radial kernel.
pub fn build_kernel_curve(kernel: RadialKernel, n: u32, tau_max: f64, steps: usize, config: &PrecisionConfig) -> Result<PhaseCurve> {
    if !(tau_max >= 0.0 && tau_max.is_finite()) {
        return Err(HkError::config("tau_max", format!("{tau_max} must be a non-negative number")));
    }
    if steps == 0 {
        return Err(HkError::config("steps", "must be positive"));
    }
    let eval = |taus: &[f64]| -> Result<Vec<Complex64>> {
        taus.par_iter().map(|&tau| radial_kernel(kernel, n, tau, config).map(|r| r.value)).collect()
    };

    let mut grid: Vec<f64> = (0..=steps).map(|k| tau_max * k as f64 / steps as f64).collect();
    let mut values = eval(&grid)?;
    let mut refinements = 0;
    loop {
        match unwrap(n, &grid, &values) {
            Ok((phase, delta_phi)) => {
                let modulus_sq = values.iter().map(|g| g.norm_sqr()).collect();
                return Ok(PhaseCurve { n, tau_grid: grid, values, modulus_sq, phase, delta_phi, refinements });
            }
            Err((tau, increment)) => {
                if refinements == MAX_REFINEMENTS {
                    return Err(HkError::UnwrapFailure { tau, increment, refinements });
                }
                refinements += 1;
                let mids: Vec<f64> = grid.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
                let mid_values = eval(&mids)?;
                let mut new_grid = Vec::with_capacity(grid.len() + mids.len());
                let mut new_values = Vec::with_capacity(grid.len() + mids.len());
                for k in 0..mids.len() {
                    new_grid.push(grid[k]);
                    new_values.push(values[k]);
                    new_grid.push(mids[k]);
                    new_values.push(mid_values[k]);
                }
                new_grid.push(grid[grid.len() - 1]);
                new_values.push(values[values.len() - 1]);
                grid = new_grid;
                values = new_values;
            }
        }
    }
}

/// Continues the residual phase from `delta_phi = 0` at the first sample.
///
/// Fails with the offending `(tau, increment)` when two neighbours differ by
/// a full half-turn in `phi`, or a quarter-turn in the residual.
fn unwrap(n: u32, grid: &[f64], values: &[Complex64]) -> std::result::Result<(Vec<f64>, Vec<f64>), (f64, f64)> {
    let mut delta_phi = Vec::with_capacity(grid.len());
    let mut phase = Vec::with_capacity(grid.len());
    let mut prev_raw = 0.0;
    let mut acc = 0.0;
    for (k, (&tau, g)) in grid.iter().zip(values).enumerate() {
        // g exp(+i exact) = |g| exp(-i delta_phi)
        let raw = -(g * Complex64::from_polar(1.0, exact_phase(n, tau))).arg();
        if k == 0 {
            acc = raw;
        } else {
            let mut step = raw - prev_raw;
            step -= 2.0 * PI * (step / (2.0 * PI)).round();
            if step.abs() >= 0.5 * PI {
                return Err((tau, step));
            }
            acc += step;
        }
        prev_raw = raw;
        delta_phi.push(acc);
        phase.push(exact_phase(n, tau) + acc);
    }
    // anchor phi(first sample) = 0 when the grid starts at tau = 0
    if grid.first() == Some(&0.0) {
        let offset = delta_phi[0];
        for (d, p) in delta_phi.iter_mut().zip(phase.iter_mut()) {
            *d -= offset;
            *p -= offset;
        }
    }
    for k in 1..phase.len() {
        let inc = phase[k] - phase[k - 1];
        if inc.abs() >= PI {
            return Err((grid[k], inc));
        }
    }
    Ok((phase, delta_phi))
}

fn window_indices(curve: &PhaseCurve, window: (f64, f64)) -> Vec<usize> {
    let (lo, hi) = (window.0.min(window.1), window.0.max(window.1));
    let slack = 1e-12 * hi.abs().max(1.0);
    curve
        .tau_grid
        .iter()
        .enumerate()
        .filter(|(_, &t)| t >= lo - slack && t <= hi + slack)
        .map(|(k, _)| k)
        .collect()
}

/// Least-squares line through `delta_phi` against `tau` over `window`.
pub fn fit_delta_phi_slope(curve: &PhaseCurve, window: (f64, f64)) -> Result<SlopeFit> {
    let idx = window_indices(curve, window);
    let m = idx.len();
    if m < MIN_FIT_SAMPLES {
        return Err(HkError::InsufficientData { needed: MIN_FIT_SAMPLES, found: m });
    }
    let xs: Vec<f64> = idx.iter().map(|&k| curve.tau_grid[k]).collect();
    let ys: Vec<f64> = idx.iter().map(|&k| curve.delta_phi[k]).collect();
    let mf = m as f64;
    let x_mean = xs.iter().sum::<f64>() / mf;
    let y_mean = ys.iter().sum::<f64>() / mf;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    if sxx == 0.0 {
        return Err(HkError::DegenerateInput("slope fit over a window of identical tau values".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - x_mean) * (y - y_mean)).sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let stderr = (ssr / (mf - 2.0) / sxx).sqrt();
    Ok(SlopeFit { slope, stderr, intercept, samples: m })
}

/// Mean of `|g_n|` over `window`, with its max-min spread.
pub fn estimate_plateau(curve: &PhaseCurve, window: (f64, f64)) -> Result<PlateauEstimate> {
    let idx = window_indices(curve, window);
    if idx.len() < 2 {
        return Err(HkError::InsufficientData { needed: 2, found: idx.len() });
    }
    let moduli: Vec<f64> = idx.iter().map(|&k| curve.modulus_sq[k].sqrt()).collect();
    let r_n = moduli.iter().sum::<f64>() / moduli.len() as f64;
    let max = moduli.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = moduli.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(PlateauEstimate { n: curve.n, r_n, window, spread: max - min })
}
