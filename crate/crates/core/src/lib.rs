//! Herman-Kluk semiclassical propagator for the single-site Bose-Hubbard model.
//!
//! The diagonal number-basis matrix elements reduce to a single oscillatory
//! radial integral `g_n(tau)`, evaluated here by adaptive Gauss-Kronrod
//! quadrature at selectable precision. Around it sit the exact quantum
//! references, steepest-descent asymptotics, phase and norm analysis, and
//! Wigner-function dynamics (exact, Herman-Kluk, truncated Wigner).

pub mod asymptotics;
pub mod cli;
pub mod cplx;
pub mod error;
pub mod kronrod;
pub mod model;
pub mod propagator;
pub mod quadrature;
pub mod real;
pub mod spectral;
mod special;
pub mod wigner;

pub use error::{HkError, Result};
pub use model::{ModelParams, PhasePoint};
pub use propagator::{g_n, g_n_fga, g_n_no_theta, matrix_element, Method, PropagatorSample};
pub use quadrature::{choose_working_digits, IntegralResult, PrecisionConfig};
