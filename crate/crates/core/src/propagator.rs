//! Number-basis matrix elements of the Herman-Kluk propagator and its
//! variants.
//!
//! The angular phase-space integral makes every variant diagonal, leaving
//!
//! ```text
//! k(tau) = (1/n!) int_0^inf e^{-s} s^n [sqrt(1 - i tau s)] exp[i tau (s^2/2 - c s)] ds
//! ```
//!
//! times a harmonic phase. The square root is present when the stability
//! factor is kept; the shift `c` depends on which pieces of the prefactor
//! survive:
//!
//! | variant          | c       | stability | harmonic phase        |
//! |------------------|---------|-----------|-----------------------|
//! | HK               | n - 1/2 | yes       | exp(-i n w t)         |
//! | HK, theta = 0    | n + 1/2 | yes       | exp(-i (n + 1/2) w t) |
//! | FGA, theta kept  | n - 1   | no        | exp(-i (n - 1/2) w t) |
//! | FGA, theta = 0   | n       | no        | exp(-i n w t)         |

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cplx::Cplx;
use crate::error::{HkError, Result};
use crate::model::{self, ModelParams, PhasePoint};
use crate::quadrature::{integrate_radial, log_envelope, IntegralResult, PrecisionConfig, RadialIntegrand};
use crate::real::{BigReal, Real};
use crate::special::{ln_factorial, ln_factorial_in};

/// Which approximation to the propagator to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    Exact,
    Hk,
    /// Frozen Gaussians: stability factor replaced by one.
    Fga { keep_theta: bool },
    /// Herman-Kluk with the phase correction dropped.
    HkNoTheta,
}

impl Method {
    /// Frozen Gaussians with the phase correction kept.
    pub const FGA: Method = Method::Fga { keep_theta: true };

    pub fn label(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Hk => "hk",
            Method::Fga { keep_theta: true } => "fga",
            Method::Fga { keep_theta: false } => "fga-no-theta",
            Method::HkNoTheta => "hk-no-theta",
        }
    }

    /// The radial kernel behind a semiclassical method.
    pub fn kernel(&self) -> Option<RadialKernel> {
        match self {
            Method::Exact => None,
            Method::Hk => Some(RadialKernel::Hk),
            Method::Fga { keep_theta } => Some(RadialKernel::Fga { keep_theta: *keep_theta }),
            Method::HkNoTheta => Some(RadialKernel::HkNoTheta),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = HkError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(Method::Exact),
            "hk" => Ok(Method::Hk),
            "fga" => Ok(Method::FGA),
            "fga-no-theta" => Ok(Method::Fga { keep_theta: false }),
            "hk-no-theta" => Ok(Method::HkNoTheta),
            other => Err(HkError::config(
                "method",
                format!("unknown method `{other}` (expected exact, hk, fga, fga-no-theta, hk-no-theta)"),
            )),
        }
    }
}

/// Radial integral behind one semiclassical variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RadialKernel {
    Hk,
    HkNoTheta,
    Fga { keep_theta: bool },
}

impl RadialKernel {
    /// Linear phase coefficient `c` for occupation `n`.
    pub fn shift(&self, n: u32) -> f64 {
        let n = f64::from(n);
        match self {
            RadialKernel::Hk => n - 0.5,
            RadialKernel::HkNoTheta => n + 0.5,
            RadialKernel::Fga { keep_theta: true } => n - 1.0,
            RadialKernel::Fga { keep_theta: false } => n,
        }
    }

    pub fn has_stability_factor(&self) -> bool {
        matches!(self, RadialKernel::Hk | RadialKernel::HkNoTheta)
    }

    /// Coefficient multiplying `-i omega t` in the harmonic phase.
    pub fn harmonic_rate(&self, n: u32) -> f64 {
        let n = f64::from(n);
        match self {
            RadialKernel::Hk | RadialKernel::Fga { keep_theta: false } => n,
            RadialKernel::HkNoTheta => n + 0.5,
            RadialKernel::Fga { keep_theta: true } => n - 0.5,
        }
    }
}

/// One value of a diagonal matrix element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagatorSample {
    pub n: u32,
    /// `U t`.
    pub tau: f64,
    pub t: f64,
    pub value: Complex64,
    pub method: Method,
    pub error_estimate: f64,
}

struct KernelIntegrand<R: Real> {
    n: u32,
    tau: R,
    tau_f: f64,
    shift: R,
    shift_f: f64,
    stability: bool,
    ln_norm: R,
}

impl<R: Real> KernelIntegrand<R> {
    fn new(ctx: R::Context, kernel: RadialKernel, n: u32, tau: f64) -> Self {
        let shift_f = kernel.shift(n);
        KernelIntegrand {
            n,
            tau: R::from_f64(ctx, tau),
            tau_f: tau,
            shift: R::from_f64(ctx, shift_f),
            shift_f,
            stability: kernel.has_stability_factor(),
            ln_norm: ln_factorial_in(ctx, n),
        }
    }
}

impl<R: Real> RadialIntegrand<R> for KernelIntegrand<R> {
    fn eval(&self, s: &R) -> Cplx<R> {
        let ctx = s.context();
        if self.n > 0 && s.is_zero() {
            return Cplx::zero(ctx);
        }
        // e^{-s} s^n / n! folded into one exponent
        let log_env = if self.n == 0 {
            -s.clone()
        } else {
            s.ln().mul_f64(f64::from(self.n)) - s.clone() - self.ln_norm.clone()
        };
        let phase = self.tau.clone() * s.clone() * (s.mul_f64(0.5) - self.shift.clone());
        let value = Cplx::cis(&phase).scale(&log_env.exp());
        if self.stability {
            value * Cplx::new(R::one(ctx), -(self.tau.clone() * s.clone())).sqrt()
        } else {
            value
        }
    }

    /// Panels over the bulk of the envelope advance the phase by at most
    /// one turn; the negligible tails get one panel each.
    fn partition(&self, s_max: f64, abs_tol: f64) -> Vec<f64> {
        let threshold = abs_tol.ln() - 6.0 * std::f64::consts::LN_10;
        let n = self.n;
        let peak = f64::from(n);
        let env = |s: f64| log_envelope(n, s);
        let root = |mut lo: f64, mut hi: f64, rising: bool| {
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if (env(mid) > threshold) == rising {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let s_lo = if n == 0 { 0.0 } else { root(0.0, peak, true) };
        let s_hi = if env(s_max) > threshold { s_max } else { root(peak.max(s_lo), s_max, false) };

        let mut breaks = vec![0.0];
        if s_lo > 0.0 {
            breaks.push(s_lo);
        }
        let width = 0.5 * (peak + 1.0).sqrt() + 0.5;
        let turn = 2.0 * std::f64::consts::PI;
        let tau = self.tau_f.abs();
        let mut s = s_lo;
        while s < s_hi {
            let far = (s - self.shift_f).abs().max((s + width - self.shift_f).abs());
            let rate = tau * (far + 1.0);
            let h = if rate > 0.0 { width.min(turn / rate) } else { width };
            s = (s + h).min(s_hi);
            breaks.push(s);
        }
        if s_hi < s_max {
            breaks.push(s_max);
        }
        breaks
    }
}

/// Evaluates one radial kernel, in `f64` when the config allows it.
pub fn radial_kernel(kernel: RadialKernel, n: u32, tau: f64, config: &PrecisionConfig) -> Result<IntegralResult> {
    config.validate()?;
    if !tau.is_finite() {
        return Err(HkError::config("tau", format!("{tau} is not finite")));
    }
    if config.uses_fast_path(n) {
        let integrand = KernelIntegrand::<f64>::new((), kernel, n, tau);
        integrate_radial(&integrand, n, config, ())
    } else {
        let ctx = BigReal::context_for_digits(config.working_digits);
        let integrand = KernelIntegrand::<BigReal>::new(ctx, kernel, n, tau);
        integrate_radial(&integrand, n, config, ctx)
    }
}

/// Herman-Kluk diagonal element stripped of its harmonic phase.
pub fn g_n(n: u32, tau: f64, config: &PrecisionConfig) -> Result<IntegralResult> {
    radial_kernel(RadialKernel::Hk, n, tau, config)
}

/// Frozen-Gaussian counterpart of [`g_n`].
///
/// With `keep_theta` the phase correction stays in the prefactor; its
/// harmonic part then shifts the ground-state phase by `omega t / 2`.
pub fn g_n_fga(n: u32, tau: f64, keep_theta: bool, config: &PrecisionConfig) -> Result<IntegralResult> {
    radial_kernel(RadialKernel::Fga { keep_theta }, n, tau, config)
}

/// [`g_n`] with the phase correction removed.
pub fn g_n_no_theta(n: u32, tau: f64, config: &PrecisionConfig) -> Result<IntegralResult> {
    radial_kernel(RadialKernel::HkNoTheta, n, tau, config)
}

/// Diagonal element `<n| U(t) |n>` for the chosen method.
pub fn matrix_element(params: &ModelParams, method: Method, n: u32, t: f64, config: &PrecisionConfig) -> Result<PropagatorSample> {
    let tau = params.tau(t);
    let (value, error_estimate) = match method.kernel() {
        None => (model::exact_propagator_element(params, n, t), 0.0),
        Some(kernel) => {
            let res = radial_kernel(kernel, n, tau, config)?;
            let harmonic = Complex64::from_polar(1.0, -kernel.harmonic_rate(n) * params.omega_e * t);
            (harmonic * res.value, res.error_estimate)
        }
    };
    Ok(PropagatorSample { n, tau, t, value, method, error_estimate })
}

/// Memo of radial kernels keyed by `(kernel, n, tau)`.
///
/// The kernels do not depend on `omega`, so one cache serves every
/// harmonic frequency.
pub struct GnCache {
    config: PrecisionConfig,
    map: Mutex<HashMap<(RadialKernel, u32, u64), IntegralResult>>,
}

impl GnCache {
    pub fn new(config: PrecisionConfig) -> Self {
        GnCache { config, map: Mutex::new(HashMap::new()) }
    }

    pub fn config(&self) -> &PrecisionConfig {
        &self.config
    }

    pub fn get(&self, kernel: RadialKernel, n: u32, tau: f64) -> Result<IntegralResult> {
        let key = (kernel, n, tau.to_bits());
        if let Some(hit) = self.map.lock().expect("kernel cache poisoned").get(&key) {
            return Ok(*hit);
        }
        let res = radial_kernel(kernel, n, tau, &self.config)?;
        self.map.lock().expect("kernel cache poisoned").insert(key, res);
        Ok(res)
    }

    pub fn len(&self) -> usize {
        self.map.lock().expect("kernel cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Monte-Carlo estimate of a complex quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub value: Complex64,
    pub stderr_re: f64,
    pub stderr_im: f64,
    pub samples: usize,
}

impl MonteCarloEstimate {
    /// Whether `target` lies within `k` standard errors, componentwise.
    pub fn is_consistent_with(&self, target: Complex64, k: f64) -> bool {
        (self.value.re - target.re).abs() <= k * self.stderr_re && (self.value.im - target.im).abs() <= k * self.stderr_im
    }
}

const MC_CHUNKS: u64 = 16;

/// `<n| U_HK(t) |n'>` from the full phase-space integral, by Monte Carlo.
///
/// `|z0|^2` is drawn from a Gamma distribution matched to the radial
/// envelope and `arg z0` uniformly, so no angular reduction is assumed.
pub fn phase_space_matrix_element(
    params: &ModelParams,
    n: u32,
    n_prime: u32,
    t: f64,
    samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if samples < 2 {
        return Err(HkError::config("samples", "need at least two samples"));
    }
    let k = 0.5 * (f64::from(n) + f64::from(n_prime));
    let gamma = Gamma::new(k + 1.0, 1.0).map_err(|e| HkError::config("samples", e.to_string()))?;
    // |integrand| / density, up to the stability modulus
    let norm = (libm::lgamma(k + 1.0) - 0.5 * (ln_factorial(n) + ln_factorial(n_prime))).exp();
    let (nf, npf) = (f64::from(n), f64::from(n_prime));

    let per_chunk = samples.div_ceil(MC_CHUNKS as usize);
    let sums: Vec<[f64; 4]> = (0..MC_CHUNKS)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let count = per_chunk.min(samples.saturating_sub(chunk as usize * per_chunk));
            let mut acc = [0.0; 4];
            for _ in 0..count {
                let s: f64 = gamma.sample(&mut rng);
                let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let z0 = Complex64::from_polar(s.sqrt(), phi);
                let p = PhasePoint::new(z0);
                let prefactor = model::full_prefactor(params, p, t);
                let zt_arg = phi - t * (params.omega_e + params.interaction * s);
                let phase = model::classical_action(params, p, t) + nf * zt_arg - npf * phi;
                let x = norm * prefactor * Complex64::from_polar(1.0, phase);
                acc[0] += x.re;
                acc[1] += x.im;
                acc[2] += x.re * x.re;
                acc[3] += x.im * x.im;
            }
            acc
        })
        .collect();
    let total = sums.iter().fold([0.0; 4], |mut a, c| {
        for i in 0..4 {
            a[i] += c[i];
        }
        a
    });
    let m = samples as f64;
    let (mean_re, mean_im) = (total[0] / m, total[1] / m);
    let var_re = (total[2] / m - mean_re * mean_re).max(0.0) * m / (m - 1.0);
    let var_im = (total[3] / m - mean_im * mean_im).max(0.0) * m / (m - 1.0);
    Ok(MonteCarloEstimate {
        value: Complex64::new(mean_re, mean_im),
        stderr_re: (var_re / m).sqrt(),
        stderr_im: (var_im / m).sqrt(),
        samples,
    })
}

/// Off-diagonal element `n != n'` of the Herman-Kluk propagator from the
/// unreduced phase-space integral; it should vanish within its error bars.
pub fn off_diagonal_check(
    params: &ModelParams,
    n: u32,
    n_prime: u32,
    t: f64,
    samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if n == n_prime {
        return Err(HkError::DegenerateInput(format!("off-diagonal check needs n != n', got n = n' = {n}")));
    }
    phase_space_matrix_element(params, n, n_prime, t, samples, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> PrecisionConfig {
        PrecisionConfig { rel_tol: 1e-8, abs_tol: 1e-11, working_digits: 30, ..PrecisionConfig::default() }
    }

    #[test]
    fn gamma_identity_small_n() {
        let config = PrecisionConfig::default();
        for n in 0..=12 {
            let g = g_n(n, 0.0, &config).unwrap();
            assert!((g.value - Complex64::new(1.0, 0.0)).norm() < 1e-10, "n = {n}: {}", g.value);
        }
    }

    #[test]
    fn conjugation_symmetry() {
        for &(n, tau) in &[(0, 0.7), (3, 0.7), (8, 0.25)] {
            let plus = g_n(n, tau, &cfg()).unwrap().value;
            let minus = g_n(n, -tau, &cfg()).unwrap().value;
            assert!((plus.conj() - minus).norm() < 1e-8, "n = {n}");
        }
    }

    #[test]
    fn fast_path_and_big_path_agree() {
        let fast = cfg();
        assert!(fast.uses_fast_path(6) && !fast.uses_fast_path(13));
        let a = g_n(6, 0.4, &fast).unwrap().value;
        // force the big backend at n = 6 through a tolerance below the fast-path floor
        let strict = PrecisionConfig { rel_tol: 1e-12, abs_tol: 1e-14, working_digits: 40, ..fast };
        assert!(!strict.uses_fast_path(6));
        let b = g_n(6, 0.4, &strict).unwrap().value;
        assert!((a - b).norm() < 1e-8);
    }

    #[test]
    fn variants_reduce_to_one_at_tau_zero() {
        for kernel in [RadialKernel::Hk, RadialKernel::HkNoTheta, RadialKernel::Fga { keep_theta: true }, RadialKernel::Fga { keep_theta: false }] {
            let v = radial_kernel(kernel, 4, 0.0, &cfg()).unwrap().value;
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-8, "{kernel:?}");
        }
    }

    #[test]
    fn fga_variants_differ_by_closed_form_at_n_zero() {
        // n = 0 without the stability factor is a Gaussian-type integral
        // whose two variants only differ in the linear phase.
        let keep = g_n_fga(0, 0.3, true, &cfg()).unwrap().value;
        let drop = g_n_fga(0, 0.3, false, &cfg()).unwrap().value;
        assert!((keep - drop).norm() > 1e-3);
        assert!(keep.norm() <= 1.0 + 1e-9 && drop.norm() <= 1.0 + 1e-9);
    }

    #[test]
    fn method_parsing_round_trips() {
        for m in [Method::Exact, Method::Hk, Method::FGA, Method::Fga { keep_theta: false }, Method::HkNoTheta] {
            assert_eq!(m.label().parse::<Method>().unwrap(), m);
        }
        assert!("wkb".parse::<Method>().is_err());
    }

    #[test]
    fn harmonic_limit_of_every_method() {
        let params = ModelParams::new(1.3, 0.0).unwrap();
        let t = 2.2;
        for n in [0u32, 3, 9] {
            let exact = matrix_element(&params, Method::Exact, n, t, &cfg()).unwrap().value;
            let hk = matrix_element(&params, Method::Hk, n, t, &cfg()).unwrap().value;
            let fga = matrix_element(&params, Method::FGA, n, t, &cfg()).unwrap().value;
            assert!((hk - exact).norm() < 1e-8);
            let shift = Complex64::from_polar(1.0, 0.5 * params.omega_e * t);
            assert!((fga - exact * shift).norm() < 1e-8);
        }
    }

    #[test]
    fn cache_reuses_values() {
        let cache = GnCache::new(cfg());
        let a = cache.get(RadialKernel::Hk, 2, 0.5).unwrap();
        let b = cache.get(RadialKernel::Hk, 2, 0.5).unwrap();
        assert_eq!(a, b);
        assert_eq!(cache.len(), 1);
    }

    #[test]
    fn phase_space_diagonal_matches_quadrature() {
        let params = ModelParams::new(1.0, 0.3).unwrap();
        let (n, t) = (2u32, 1.5);
        let mc = phase_space_matrix_element(&params, n, n, t, 200_000, 11).unwrap();
        let quad = matrix_element(&params, Method::Hk, n, t, &cfg()).unwrap().value;
        assert!(mc.is_consistent_with(quad, 4.0), "{mc:?} vs {quad}");
    }

    #[test]
    fn off_diagonal_rejects_diagonal_input() {
        let params = ModelParams::new(1.0, 0.3).unwrap();
        assert!(matches!(off_diagonal_check(&params, 2, 2, 1.0, 100, 0), Err(HkError::DegenerateInput(_))));
    }

    #[test]
    fn monte_carlo_is_deterministic_for_a_seed() {
        let params = ModelParams::new(1.0, 0.5).unwrap();
        let a = off_diagonal_check(&params, 1, 3, 2.0, 10_000, 5).unwrap();
        let b = off_diagonal_check(&params, 1, 3, 2.0, 10_000, 5).unwrap();
        assert_eq!(a, b);
    }
}
