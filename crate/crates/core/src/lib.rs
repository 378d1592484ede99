//! Numerical toolkit for the driven-dissipative Kerr parametric oscillator:
//! mean-field theory, Liouvillian exact diagonalization, Gaussian Green
//! functions and Langevin scaling analysis.

pub mod error;
pub mod keldysh;
pub mod langevin;
pub mod liouville;
pub mod meanfield;
pub mod params;
pub mod quad;
pub mod scaling;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use params::{
    canonicalize_gauge, classify_regime, FrequencyGrid, GaugeFrame, ModelParams, Regime,
    DEFAULT_REGIME_TOLERANCE,
};
