//! Wigner-function dynamics of an initial coherent state.
//!
//! Exact and Herman-Kluk fields go through the number basis: both
//! propagators are diagonal there, so evolving the amplitudes `c_n` and
//! summing the Laguerre series is equivalent to the phase-space route. The
//! phase-space route is kept as a Monte-Carlo oracle. The truncated Wigner
//! field is the initial Gaussian carried along the classical flow.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HkError, Result};
use crate::model::{self, ModelParams, PhasePoint};
use crate::propagator::{matrix_element, Method};
use crate::quadrature::PrecisionConfig;
use crate::special::ln_factorial;

/// Poisson tail below which occupations are dropped.
///
/// The pointwise Wigner error scales like the square root of the dropped
/// weight, so this is far below the accuracy wanted from the field.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-20;
/// Fewest samples accepted by the Monte-Carlo oracle.
pub const MIN_ORACLE_SAMPLES: usize = 10_000;

/// Initial coherent state `|z_i>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentInitial {
    pub z_i: Complex64,
}

impl CoherentInitial {
    pub fn new(z_i: Complex64) -> Self {
        CoherentInitial { z_i }
    }

    /// Smallest `N` whose Poisson tail `sum_{n > N} p_n` is below `tol`.
    pub fn poisson_cutoff(&self, tol: f64) -> u32 {
        let mean = self.z_i.norm_sqr();
        let ln_p = |n: u32| {
            if mean == 0.0 {
                if n == 0 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            } else {
                -mean + f64::from(n) * mean.ln() - ln_factorial(n)
            }
        };
        let tail = |cut: u32| -> f64 { (cut + 1..cut + 400).map(|n| ln_p(n).exp()).sum() };
        (0..).find(|&cut| tail(cut) < tol).expect("Poisson tail eventually vanishes")
    }

    /// Number-basis amplitudes `c_n = <n|z_i>` for `n <= n_cut`.
    pub fn number_state(&self, n_cut: u32) -> NumberState {
        NumberState { coeffs: (0..=n_cut).map(|n| model::number_amplitude(self.z_i, n)).collect() }
    }
}

/// Truncated pure state `sum_n c_n |n>`, not necessarily normalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumberState {
    pub coeffs: Vec<Complex64>,
}

impl NumberState {
    pub fn n_cut(&self) -> u32 {
        self.coeffs.len().saturating_sub(1) as u32
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Wigner function at `alpha`, normalized to `norm_sqr()` under `d^2 alpha / pi`.
    pub fn wigner(&self, alpha: Complex64) -> f64 {
        wigner_from_number_state(self, alpha)
    }
}

/// Generalized Laguerre `L_m^k(x)` for `m = 0..=m_max`, by upward recurrence.
pub fn laguerre_column(m_max: usize, k: f64, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(m_max + 1);
    out.push(1.0);
    if m_max >= 1 {
        out.push(1.0 + k - x);
    }
    for m in 1..m_max {
        let mf = m as f64;
        let next = ((2.0 * mf + 1.0 + k - x) * out[m] - (mf + k) * out[m - 1]) / (mf + 1.0);
        out.push(next);
    }
    out
}

pub fn initial_wigner(z_i: Complex64, alpha: Complex64) -> f64 {
    2.0 * (-2.0 * (alpha - z_i).norm_sqr()).exp()
}

/// Wigner function of `sum_n c_n |n>`.
///
/// Diagonal terms carry `(-1)^n L_n(4|a|^2)`; the coherence between `|m+k>`
/// and `|m>` carries `(2 a*)^k (-1)^m sqrt(m!/(m+k)!) L_m^k(4|a|^2)`, all
/// times `2 exp(-2|a|^2)`. Magnitudes are combined in logs so large
/// `|alpha|` does not overflow.
pub fn wigner_from_number_state(state: &NumberState, alpha: Complex64) -> f64 {
    let c = &state.coeffs;
    let len = c.len();
    if len == 0 {
        return 0.0;
    }
    let r2 = alpha.norm_sqr();
    let x = 4.0 * r2;
    let gauss_ln = (2.0f64).ln() - 2.0 * r2;
    let ln_two_r = if r2 > 0.0 { (2.0 * r2.sqrt()).ln() } else { f64::NEG_INFINITY };
    let arg = alpha.arg();

    let diag_laguerre = laguerre_column(len - 1, 0.0, x);
    let mut total: f64 = c
        .iter()
        .zip(&diag_laguerre)
        .enumerate()
        .map(|(n, (cn, l))| {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            sign * cn.norm_sqr() * l
        })
        .sum::<f64>()
        * gauss_ln.exp();

    if r2 > 0.0 {
        for k in 1..len {
            let lag = laguerre_column(len - 1 - k, k as f64, x);
            let mut inner = Complex64::new(0.0, 0.0);
            for m in 0..len - k {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                let ln_w = gauss_ln + k as f64 * ln_two_r + 0.5 * (ln_factorial(m as u32) - ln_factorial((m + k) as u32));
                inner += c[m + k] * c[m].conj() * (sign * ln_w.exp() * lag[m]);
            }
            // (alpha*)^k carries the phase exp(-i k arg alpha)
            total += 2.0 * (inner * Complex64::from_polar(1.0, -(k as f64) * arg)).re;
        }
    }
    total
}

/// Applies a diagonal propagator to every amplitude.
///
/// The working precision is escalated per occupation following the default
/// policy. No renormalization is applied.
pub fn evolve_number_state(state: &NumberState, params: &ModelParams, t: f64, method: Method, config: &PrecisionConfig) -> Result<NumberState> {
    if method == Method::HkNoTheta {
        return Err(HkError::config("method", "wave-packet evolution supports exact, hk and fga"));
    }
    let coeffs = state
        .coeffs
        .par_iter()
        .enumerate()
        .map(|(n, c)| {
            let n = n as u32;
            matrix_element(params, method, n, t, &config.escalated_for(n)).map(|s| s.value * c)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NumberState { coeffs })
}

pub fn exact_wigner(z_i: Complex64, params: &ModelParams, t: f64, alpha: Complex64, n_cut: u32) -> f64 {
    let state = CoherentInitial::new(z_i).number_state(n_cut);
    let coeffs = state
        .coeffs
        .iter()
        .enumerate()
        .map(|(n, c)| model::exact_propagator_element(params, n as u32, t) * c)
        .collect();
    wigner_from_number_state(&NumberState { coeffs }, alpha)
}

pub fn hk_wigner(z_i: Complex64, params: &ModelParams, t: f64, alpha: Complex64, n_cut: u32, config: &PrecisionConfig) -> Result<f64> {
    let state = CoherentInitial::new(z_i).number_state(n_cut);
    let evolved = evolve_number_state(&state, params, t, Method::Hk, config)?;
    Ok(wigner_from_number_state(&evolved, alpha))
}

/// Truncated Wigner field: `W0` pulled back along the classical flow of the
/// Wigner symbol, whose frequency is `(omega - U) + U |alpha|^2`.
pub fn twa_wigner(z_i: Complex64, params: &ModelParams, t: f64, alpha: Complex64) -> f64 {
    let freq = (params.omega_e - params.interaction) + params.interaction * alpha.norm_sqr();
    initial_wigner(z_i, alpha * Complex64::from_polar(1.0, freq * t))
}

/// Wigner function of the dyad `|u><v|` between coherent states.
pub fn dyad_wigner(u: Complex64, v: Complex64, alpha: Complex64) -> Complex64 {
    2.0 * model::coherent_overlap(v, u) * (-2.0 * (alpha - u) * (alpha.conj() - v.conj())).exp()
}

/// Monte-Carlo value and standard error of a real quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
}

const ORACLE_CHUNKS: u64 = 16;

/// Herman-Kluk Wigner function from the double phase-space integral.
///
/// Both initial points are drawn from a Gaussian of unit variance per
/// quadrature around `z_i`; each pair contributes the Wigner function of
/// `|z_t><z_t'|` weighted by prefactors, actions and overlaps with `z_i`.
pub fn hk_wigner_direct_oracle(
    z_i: Complex64,
    params: &ModelParams,
    t: f64,
    alpha: Complex64,
    mc_samples: usize,
    seed: u64,
) -> Result<OracleEstimate> {
    if mc_samples < MIN_ORACLE_SAMPLES {
        return Err(HkError::config("mc_samples", format!("{mc_samples} is below the minimum {MIN_ORACLE_SAMPLES}")));
    }
    // weight of one initial point divided by its sampling density
    let leg = |z0: Complex64| -> (Complex64, Complex64) {
        let p = PhasePoint::new(z0);
        let density = 0.5 * (-0.5 * (z0 - z_i).norm_sqr()).exp();
        let w = model::full_prefactor(params, p, t)
            * Complex64::from_polar(1.0, model::classical_action(params, p, t))
            * model::coherent_overlap(z0, z_i)
            / density;
        (w, model::classical_trajectory(params, p, t))
    };
    let per_chunk = mc_samples.div_ceil(ORACLE_CHUNKS as usize);
    let sums: Vec<(f64, f64)> = (0..ORACLE_CHUNKS)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let count = per_chunk.min(mc_samples.saturating_sub(chunk as usize * per_chunk));
            let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                let z0 = z_i + Complex64::new(normal(), normal());
                let z0p = z_i + Complex64::new(normal(), normal());
                let (w, zt) = leg(z0);
                let (wp, ztp) = leg(z0p);
                let x = (w * wp.conj() * dyad_wigner(zt, ztp, alpha)).re;
                s1 += x;
                s2 += x * x;
            }
            (s1, s2)
        })
        .collect();
    let (s1, s2) = sums.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let m = mc_samples as f64;
    let mean = s1 / m;
    let var = (s2 / m - mean * mean).max(0.0) * m / (m - 1.0);
    Ok(OracleEstimate { value: mean, stderr: (var / m).sqrt(), samples: mc_samples })
}

/// Dynamics whose Wigner field can be rendered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WignerMethod {
    Exact,
    Hk,
    Twa,
}

impl WignerMethod {
    pub fn label(&self) -> &'static str {
        match self {
            WignerMethod::Exact => "exact",
            WignerMethod::Hk => "hk",
            WignerMethod::Twa => "twa",
        }
    }
}

impl std::str::FromStr for WignerMethod {
    type Err = HkError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(WignerMethod::Exact),
            "hk" => Ok(WignerMethod::Hk),
            "twa" => Ok(WignerMethod::Twa),
            other => Err(HkError::config("method", format!("unknown Wigner method `{other}` (expected exact, hk, twa)"))),
        }
    }
}

/// Rectangular lattice over complex `alpha`, inclusive of both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub step: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { re_min: -4.0, re_max: 4.0, im_min: -4.0, im_max: 4.0, step: 0.05 }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(HkError::config("grid", format!("step {} must be positive", self.step)));
        }
        if !(self.re_max >= self.re_min && self.im_max >= self.im_min) {
            return Err(HkError::config("grid", "extents must satisfy min <= max"));
        }
        Ok(())
    }

    fn axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
        let count = ((hi - lo) / step + 1e-9).floor() as usize;
        (0..=count).map(|k| lo + k as f64 * step).collect()
    }

    pub fn re_axis(&self) -> Vec<f64> {
        Self::axis(self.re_min, self.re_max, self.step)
    }

    pub fn im_axis(&self) -> Vec<f64> {
        Self::axis(self.im_min, self.im_max, self.step)
    }
}

/// Wigner values on a lattice; index `i_im * re_axis.len() + i_re`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerField {
    pub grid: GridSpec,
    pub re_axis: Vec<f64>,
    pub im_axis: Vec<f64>,
    pub exact: Option<Vec<f64>>,
    pub hk: Option<Vec<f64>>,
    pub twa: Option<Vec<f64>>,
}

impl WignerField {
    pub fn values(&self, method: WignerMethod) -> Option<&[f64]> {
        match method {
            WignerMethod::Exact => self.exact.as_deref(),
            WignerMethod::Hk => self.hk.as_deref(),
            WignerMethod::Twa => self.twa.as_deref(),
        }
    }

    /// Riemann sum of `W d^2 alpha / pi`.
    pub fn normalization(&self, method: WignerMethod) -> Option<f64> {
        let cell = self.grid.step * self.grid.step / std::f64::consts::PI;
        self.values(method).map(|v| v.iter().sum::<f64>() * cell)
    }

    pub fn alpha_at(&self, index: usize) -> Complex64 {
        let width = self.re_axis.len();
        Complex64::new(self.re_axis[index % width], self.im_axis[index / width])
    }

    pub fn len(&self) -> usize {
        self.re_axis.len() * self.im_axis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Evaluates the requested fields on `grid`.
///
/// `n_cut` defaults to the Poisson cutoff at [`DEFAULT_TAIL_TOLERANCE`].
pub fn render_field(
    z_i: Complex64,
    params: &ModelParams,
    t: f64,
    grid: &GridSpec,
    methods: &[WignerMethod],
    n_cut: Option<u32>,
    config: &PrecisionConfig,
) -> Result<WignerField> {
    grid.validate()?;
    let initial = CoherentInitial::new(z_i);
    let n_cut = n_cut.unwrap_or_else(|| initial.poisson_cutoff(DEFAULT_TAIL_TOLERANCE));
    let state = initial.number_state(n_cut);
    let re_axis = grid.re_axis();
    let im_axis = grid.im_axis();
    let points: Vec<Complex64> = im_axis
        .iter()
        .flat_map(|&im| re_axis.iter().map(move |&re| Complex64::new(re, im)))
        .collect();

    let series_field = |s: &NumberState| -> Vec<f64> { points.par_iter().map(|&a| wigner_from_number_state(s, a)).collect() };
    let mut field = WignerField { grid: *grid, re_axis: re_axis.clone(), im_axis: im_axis.clone(), exact: None, hk: None, twa: None };
    for method in methods {
        match method {
            WignerMethod::Exact => {
                let evolved = evolve_number_state(&state, params, t, Method::Exact, config)?;
                field.exact = Some(series_field(&evolved));
            }
            WignerMethod::Hk => {
                let evolved = evolve_number_state(&state, params, t, Method::Hk, config)?;
                field.hk = Some(series_field(&evolved));
            }
            WignerMethod::Twa => {
                field.twa = Some(points.par_iter().map(|&a| twa_wigner(z_i, params, t, a)).collect());
            }
        }
    }
    Ok(field)
}
