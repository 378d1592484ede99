//! Model parameters, regime classification, gauge canonicalization and
//! frequency grids shared by every other module.
//!
//! All rates and frequencies are expressed in units of the loss rate; the
//! loss rate itself stays a parameter so unit-scaling can be tested.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used to route `|G| = gamma` to the critical formulas.
pub const DEFAULT_REGIME_TOLERANCE: f64 = 1e-9;

/// Physical parameters of the driven-dissipative Kerr oscillator.
///
/// `H = -omega_d a^dag a + (U/2) a^dag a^dag a a + (G/4) a^dag a^dag + h.c.`
/// with single-photon loss at rate `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Detuning between half the drive frequency and the cavity.
    pub omega_d: f64,
    /// Kerr strength `U >= 0`.
    pub kerr: f64,
    /// Complex two-photon drive amplitude `G`.
    pub drive: C64,
    /// Single-photon loss rate, strictly positive.
    pub gamma: f64,
}

impl ModelParams {
    pub fn new(omega_d: f64, kerr: f64, drive: C64, gamma: f64) -> Result<Self> {
        let p = ModelParams {
            omega_d,
            kerr,
            drive,
            gamma,
        };
        p.validate()?;
        Ok(p)
    }

    /// Resonant driving (`omega_d = 0`) with a real drive strength `G = g`.
    pub fn resonant(drive: f64, kerr: f64, gamma: f64) -> Result<Self> {
        Self::new(0.0, kerr, C64::new(drive, 0.0), gamma)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gamma must be positive and finite, got {}",
                self.gamma
            )));
        }
        if !(self.kerr >= 0.0 && self.kerr.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Kerr strength must be non-negative and finite, got {}",
                self.kerr
            )));
        }
        if !self.omega_d.is_finite() {
            return Err(Error::InvalidParameter("omega_d must be finite".into()));
        }
        if !(self.drive.re.is_finite() && self.drive.im.is_finite()) {
            return Err(Error::InvalidParameter("drive must be finite".into()));
        }
        Ok(())
    }

    /// `|G|`.
    pub fn drive_strength(&self) -> f64 {
        self.drive.norm()
    }

    pub fn is_resonant(&self) -> bool {
        self.omega_d == 0.0
    }

    pub fn regime(&self) -> Regime {
        classify_regime(self, DEFAULT_REGIME_TOLERANCE)
    }

    pub fn with_kerr(mut self, kerr: f64) -> Self {
        self.kerr = kerr;
        self
    }

    pub fn with_drive(mut self, drive: C64) -> Self {
        self.drive = drive;
        self
    }
}

/// Which side of the transition `|G| = gamma` the parameters sit on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Below,
    Critical,
    Above,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::Below => "below",
            Regime::Critical => "critical",
            Regime::Above => "above",
        };
        f.write_str(s)
    }
}

/// Critical iff `||G| - gamma| <= eps_reg * gamma`.
pub fn classify_regime(params: &ModelParams, eps_reg: f64) -> Regime {
    let g = params.drive_strength();
    let band = eps_reg * params.gamma;
    if (g - params.gamma).abs() <= band {
        Regime::Critical
    } else if g < params.gamma {
        Regime::Below
    } else {
        Regime::Above
    }
}

/// Phase convention `G = i |G| exp(-i theta_G)`.
///
/// In the canonical frame the drive is `i|G|`; amplitudes transform as
/// `alpha' = alpha * exp(i theta_G / 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaugeFrame {
    pub theta_g: f64,
}

impl GaugeFrame {
    pub fn identity() -> Self {
        GaugeFrame { theta_g: 0.0 }
    }

    /// Lab-frame amplitude to canonical-frame amplitude.
    pub fn to_canonical(&self, alpha: C64) -> C64 {
        alpha * C64::from_polar(1.0, 0.5 * self.theta_g)
    }

    /// Canonical-frame amplitude back to the lab frame.
    pub fn from_canonical(&self, alpha: C64) -> C64 {
        alpha * C64::from_polar(1.0, -0.5 * self.theta_g)
    }
}

/// Rotate the drive phase so that `G = i|G|`.
///
/// Returns the canonical parameters and the frame needed to map amplitudes
/// back. Zero drive yields the identity frame.
pub fn canonicalize_gauge(params: &ModelParams) -> (ModelParams, GaugeFrame) {
    let g = params.drive_strength();
    if g == 0.0 {
        return (*params, GaugeFrame::identity());
    }
    let mut theta = FRAC_PI_2 - params.drive.arg();
    // wrap into (-pi, pi]
    if theta > PI {
        theta -= 2.0 * PI;
    } else if theta <= -PI {
        theta += 2.0 * PI;
    }
    let canonical = ModelParams {
        drive: C64::new(0.0, g),
        ..*params
    };
    (canonical, GaugeFrame { theta_g: theta })
}

/// Uniform, strictly increasing frequency grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub omega_min: f64,
    pub omega_max: f64,
    pub n_points: usize,
}

impl FrequencyGrid {
    pub fn new(omega_min: f64, omega_max: f64, n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::InvalidParameter(format!(
                "frequency grid needs at least 2 points, got {n_points}"
            )));
        }
        if !(omega_min.is_finite() && omega_max.is_finite() && omega_min < omega_max) {
            return Err(Error::InvalidParameter(format!(
                "frequency grid bounds must satisfy min < max, got [{omega_min}, {omega_max}]"
            )));
        }
        Ok(FrequencyGrid {
            omega_min,
            omega_max,
            n_points,
        })
    }

    /// Grid on `[-half_width, half_width]`; point `i` and `n-1-i` are exact negatives.
    pub fn symmetric(half_width: f64, n_points: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n_points)
    }

    pub fn spacing(&self) -> f64 {
        (self.omega_max - self.omega_min) / (self.n_points - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        let n = (self.n_points - 1) as f64;
        let i = i as f64;
        // weighted form keeps symmetric grids exactly antisymmetric
        (self.omega_min * (n - i) + self.omega_max * i) / n
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.point(i)).collect()
    }
}
