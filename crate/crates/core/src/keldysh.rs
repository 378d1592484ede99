//! Gaussian-fluctuation Green functions in the thermodynamic limit and the
//! spectra derived from them: absorption (spectral function), inelastic
//! emission and the effective distribution function.

use std::f64::consts::PI;

use ndarray::{array, Array1, Array2};
use ndarray_linalg::{Inverse, Solve};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::meanfield::{steady_order_parameter, steady_phase};
use crate::params::{FrequencyGrid, ModelParams, Regime};
use crate::quad;

/// Half-width of the integration window for sum rules, in units of gamma.
pub const SUM_RULE_WINDOW: f64 = 1e3;
/// Outer bracket for half-maximum searches, in units of gamma.
pub const FWHM_SEARCH_LIMIT: f64 = 50.0;

fn require_generic(params: &ModelParams) -> Result<Regime> {
    params.validate()?;
    if !params.is_resonant() {
        return Err(Error::NonResonant(params.omega_d));
    }
    match params.regime() {
        Regime::Critical => Err(Error::CriticalRegime),
        r => Ok(r),
    }
}

/// Fluctuation parameters around the mean-field solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveParams {
    /// `-2 phi`
    pub omega_d_eff: f64,
    /// `G + 2 phi exp(2 i theta)`
    pub drive_eff: C64,
    /// `gamma / |G|`
    pub s: f64,
    pub phi: f64,
}

pub fn effective_params(params: &ModelParams) -> Result<EffectiveParams> {
    params.validate()?;
    if !params.is_resonant() {
        return Err(Error::NonResonant(params.omega_d));
    }
    let phi = steady_order_parameter(params)?;
    let drive_eff = if phi > 0.0 {
        params.drive + 2.0 * phi * steady_phase(params)?
    } else {
        params.drive
    };
    let g = params.drive_strength();
    Ok(EffectiveParams {
        omega_d_eff: -2.0 * phi,
        drive_eff,
        s: if g > 0.0 { params.gamma / g } else { f64::INFINITY },
        phi,
    })
}

/// Closed-form Green functions for one parameter point.
///
/// Frequency-domain values are returned as `i g_R`, `i g_A` and `i g_K`;
/// `i g_K` is real and positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GreenFunctionSet {
    pub params: ModelParams,
    pub regime: Regime,
    pub phi: f64,
    pub effective: EffectiveParams,
}

pub fn green_functions(params: &ModelParams) -> Result<GreenFunctionSet> {
    let regime = require_generic(params)?;
    let effective = effective_params(params)?;
    Ok(GreenFunctionSet {
        params: *params,
        regime,
        phi: effective.phi,
        effective,
    })
}

impl GreenFunctionSet {
    pub fn gamma(&self) -> f64 {
        self.params.gamma
    }

    /// `i g_R(omega)`.
    pub fn ig_r(&self, omega: f64) -> C64 {
        let gamma = self.params.gamma;
        let z = C64::new(gamma, -2.0 * omega);
        match self.regime {
            Regime::Below => {
                let g2 = self.params.drive.norm_sqr();
                2.0 * z / (z * z - g2)
            }
            _ => {
                let phi = self.phi;
                let num = 2.0 * (z - C64::new(0.0, 4.0 * phi));
                // 16 phi^2 - gamma^2 = 4 |G|^2 - 5 gamma^2 written via phi
                num / (z * z + 16.0 * phi * phi - gamma * gamma)
            }
        }
    }

    /// `i g_A(omega) = -conj(i g_R(omega))`.
    pub fn ig_a(&self, omega: f64) -> C64 {
        -self.ig_r(omega).conj()
    }

    /// `i g_K(omega)` for the fluctuations (elastic part excluded).
    pub fn ig_k(&self, omega: f64) -> f64 {
        let gamma = self.params.gamma;
        let w2 = omega * omega;
        match self.regime {
            Regime::Below => {
                let g = self.params.drive_strength();
                let num = 4.0 * gamma * (g * g + gamma * gamma + 4.0 * w2);
                let lo = (gamma - g).powi(2) + 4.0 * w2;
                let hi = (gamma + g).powi(2) + 4.0 * w2;
                num / (lo * hi)
            }
            _ => {
                let phi = self.phi;
                let p2 = phi * phi;
                let num = 0.25
                    * gamma
                    * (4.0 * w2 + 16.0 * phi * omega + 16.0 * p2 + 2.0 * gamma * gamma);
                let den = w2 * w2 + (gamma * gamma - 8.0 * p2) * w2 + 16.0 * p2 * p2;
                num / den
            }
        }
    }

    /// `g_R(omega)`.
    pub fn retarded(&self, omega: f64) -> C64 {
        -C64::i() * self.ig_r(omega)
    }

    /// `g_A(omega) = conj(g_R(omega))`.
    pub fn advanced(&self, omega: f64) -> C64 {
        -C64::i() * self.ig_a(omega)
    }

    /// `g_K(omega)`, purely imaginary.
    pub fn keldysh(&self, omega: f64) -> C64 {
        C64::new(0.0, -self.ig_k(omega))
    }

    /// Spectral function from `(i g_R - i g_A) / (2 pi)`.
    pub fn spectral_from_retarded(&self, omega: f64) -> f64 {
        ((self.ig_r(omega) - self.ig_a(omega)) / (2.0 * PI)).re
    }

    /// Linear drift of the fluctuations `(d alpha, d alpha^*)`.
    pub fn fluctuation_drift(&self) -> [[C64; 2]; 2] {
        let i = C64::i();
        let w = self.effective.omega_d_eff;
        let ge = self.effective.drive_eff;
        let hg = 0.5 * self.params.gamma;
        [
            [i * w - hg, -i * 0.5 * ge],
            [i * 0.5 * ge.conj(), -i * w - hg],
        ]
    }

    fn stationary_covariance(&self) -> Result<Array2<C64>> {
        // M S + S M^dag + (gamma/2) 1 = 0, row-major vectorization
        let m = self.fluctuation_drift();
        let mut sys = Array2::<C64>::zeros((4, 4));
        for r in 0..2 {
            for c in 0..2 {
                for k in 0..2 {
                    // (M S)_{rc} = sum_k M_{rk} S_{kc}
                    sys[[2 * r + c, 2 * k + c]] += m[r][k];
                    // (S M^dag)_{rc} = sum_k S_{rk} conj(M_{ck})
                    sys[[2 * r + c, 2 * r + k]] += m[c][k].conj();
                }
            }
        }
        let h = 0.5 * self.params.gamma;
        let rhs: Array1<C64> = array![-h, 0.0, 0.0, -h].mapv(C64::from);
        let s = sys.solve(&rhs).map_err(|e| Error::LinearSolve {
            dim: 4,
            message: e.to_string(),
        })?;
        Ok(Array2::from_shape_vec((2, 2), s.to_vec()).expect("shape 2x2"))
    }

    fn propagator(&self, tau: f64) -> [[C64; 2]; 2] {
        expm2(self.fluctuation_drift(), tau)
    }

    /// `i g_R(tau) - i g_A(tau)`; equals one at `tau = 0`.
    pub fn spectral_weight_time(&self, tau: f64) -> C64 {
        let u = self.propagator(tau.abs())[0][0];
        if tau >= 0.0 {
            u
        } else {
            u.conj()
        }
    }

    /// `i g_K(tau)` for the fluctuations.
    pub fn ig_k_time(&self, tau: f64) -> Result<C64> {
        let s = self.stationary_covariance()?;
        let u = self.propagator(tau.abs());
        let v = 2.0 * (u[0][0] * s[[0, 0]] + u[0][1] * s[[1, 0]]);
        Ok(if tau >= 0.0 { v } else { v.conj() })
    }
}

/// `exp(M tau)` for a 2x2 complex matrix.
fn expm2(m: [[C64; 2]; 2], tau: f64) -> [[C64; 2]; 2] {
    let t = 0.5 * (m[0][0] + m[1][1]);
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let s = (t * t - det).sqrt();
    let (ch, sh_over_s) = if (s * tau).norm() < 1e-8 {
        (C64::new(1.0, 0.0), C64::new(tau, 0.0))
    } else {
        ((s * tau).cosh(), (s * tau).sinh() / s)
    };
    let e = (t * tau).exp();
    [
        [e * (ch + sh_over_s * (m[0][0] - t)), e * sh_over_s * m[0][1]],
        [e * sh_over_s * m[1][0], e * (ch + sh_over_s * (m[1][1] - t))],
    ]
}

/// `(i g_R, i g_K)` from inverting the quadratic-action kernel at one frequency.
pub fn matrix_green_functions(params: &ModelParams, omega: f64) -> Result<(C64, f64)> {
    require_generic(params)?;
    let eff = effective_params(params)?;
    let i = C64::i();
    let d = -eff.omega_d_eff;
    let ge = eff.drive_eff;
    let hg = 0.5 * params.gamma;
    let pr: Array2<C64> = array![
        [omega + i * hg - d, -0.5 * ge],
        [-0.5 * ge.conj(), -omega - i * hg - d]
    ]
    .mapv(|z| -i * z);
    let pa: Array2<C64> = array![
        [omega - i * hg - d, -0.5 * ge],
        [-0.5 * ge.conj(), -omega + i * hg - d]
    ]
    .mapv(|z| -i * z);
    let pk: Array2<C64> = Array2::from_diag_elem(2, C64::new(params.gamma, 0.0));
    let err = |e: ndarray_linalg::error::LinalgError| Error::LinearSolve {
        dim: 2,
        message: e.to_string(),
    };
    let pr_inv = pr.inv().map_err(err)?;
    let pa_inv = pa.inv().map_err(err)?;
    let ig_r = pr_inv[[0, 0]];
    let ck = -pr_inv.dot(&pk).dot(&pa_inv);
    Ok((ig_r, ck[[0, 0]].re))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Spectral,
    Power,
    HFunction,
}

/// A point mass `weight * delta(omega - location)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaComponent {
    pub location: f64,
    pub weight: f64,
}

/// Sampled curve on a frequency grid. Masked points hold NaN and are listed
/// in `masked`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralCurve {
    pub kind: CurveKind,
    pub omegas: Vec<f64>,
    pub values: Vec<f64>,
    pub delta: Option<DeltaComponent>,
    pub masked: Vec<usize>,
    /// Distance below threshold for near-critical approximations.
    pub delta_g: Option<f64>,
}

impl SpectralCurve {
    fn sample(kind: CurveKind, grid: &FrequencyGrid, f: impl Fn(f64) -> f64) -> Self {
        let omegas = grid.points();
        let values = omegas.iter().map(|&w| f(w)).collect();
        SpectralCurve {
            kind,
            omegas,
            values,
            delta: None,
            masked: Vec::new(),
            delta_g: None,
        }
    }

    pub fn max_asymmetry(&self) -> f64 {
        let n = self.values.len();
        (0..n)
            .map(|i| self.values[i] - self.values[n - 1 - i])
            .filter(|d| d.is_finite())
            .fold(0.0, |m, d| m.max(d.abs()))
    }
}

/// Absorption spectrum below threshold.
fn spectral_below(gamma: f64, g: f64, omega: f64) -> f64 {
    let w2 = omega * omega;
    let a = gamma * gamma - g * g;
    let num = 4.0 * gamma * (4.0 * w2 + a);
    let den = (a - 4.0 * w2).powi(2) + 16.0 * gamma * gamma * w2;
    num / den / (2.0 * PI)
}

/// Absorption spectrum above threshold, written without the removable
/// singularity so that it vanishes exactly at `omega = -2 phi`.
fn spectral_above(gamma: f64, phi: f64, omega: f64) -> f64 {
    let plus = omega + 2.0 * phi;
    let minus = omega - 2.0 * phi;
    let den = (minus * plus).powi(2) + gamma * gamma * omega * omega;
    gamma * plus * plus / den / (2.0 * PI)
}

fn power_below(gamma: f64, g: f64, omega: f64) -> f64 {
    let w2 = omega * omega;
    let a = gamma * gamma - g * g;
    4.0 * gamma * gamma * g * g / ((a - 4.0 * w2).powi(2) + 16.0 * gamma * gamma * w2)
}

fn power_above(gamma: f64, phi: f64, omega: f64) -> f64 {
    let w2 = omega * omega;
    let d = (omega - 2.0 * phi) * (omega + 2.0 * phi);
    0.25 * gamma.powi(4) / (d * d + gamma * gamma * w2)
}

fn h_below(gamma: f64, g: f64, omega: f64) -> f64 {
    2.0 * g * g / (4.0 * omega * omega + gamma * gamma - g * g) + 1.0
}

fn h_above(gamma: f64, phi: f64, omega: f64) -> f64 {
    let plus = omega + 2.0 * phi;
    0.5 * gamma * gamma / (plus * plus) + 1.0
}

/// Closed-form evaluators for a non-critical parameter point.
#[derive(Debug, Clone, Copy)]
pub struct Spectra {
    regime: Regime,
    gamma: f64,
    drive: f64,
    phi: f64,
}

impl Spectra {
    pub fn new(params: &ModelParams) -> Result<Self> {
        let regime = require_generic(params)?;
        Ok(Spectra {
            regime,
            gamma: params.gamma,
            drive: params.drive_strength(),
            phi: steady_order_parameter(params)?,
        })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn absorption(&self, omega: f64) -> f64 {
        match self.regime {
            Regime::Below => spectral_below(self.gamma, self.drive, omega),
            _ => spectral_above(self.gamma, self.phi, omega),
        }
    }

    pub fn inelastic(&self, omega: f64) -> f64 {
        match self.regime {
            Regime::Below => power_below(self.gamma, self.drive, omega),
            _ => power_above(self.gamma, self.phi, omega),
        }
    }

    pub fn h_tilde(&self, omega: f64) -> f64 {
        match self.regime {
            Regime::Below => h_below(self.gamma, self.drive, omega),
            _ => h_above(self.gamma, self.phi, omega),
        }
    }

    /// Frequencies where the absorption spectrum has structure.
    fn features(&self) -> Vec<f64> {
        let mut pts = vec![0.0];
        let narrow = (self.gamma - self.drive).abs();
        if narrow > 0.0 {
            pts.extend([-narrow, narrow]);
        }
        if self.phi > 0.0 {
            pts.extend([-2.0 * self.phi, 2.0 * self.phi]);
        }
        pts
    }
}

pub fn spectral_function(params: &ModelParams, grid: &FrequencyGrid) -> Result<SpectralCurve> {
    let s = Spectra::new(params)?;
    Ok(SpectralCurve::sample(CurveKind::Spectral, grid, |w| s.absorption(w)))
}

/// Smooth part `(1/2pi) gamma/(omega^2 + gamma^2)` plus `delta(omega)/2`.
pub fn critical_spectral_function(gamma: f64, grid: &FrequencyGrid) -> Result<SpectralCurve> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter("gamma must be positive".into()));
    }
    let mut c = SpectralCurve::sample(CurveKind::Spectral, grid, |w| {
        gamma / (w * w + gamma * gamma) / (2.0 * PI)
    });
    c.delta = Some(DeltaComponent {
        location: 0.0,
        weight: 0.5,
    });
    Ok(c)
}

/// Inelastic emission spectrum.
pub fn power_spectrum_inel(params: &ModelParams, grid: &FrequencyGrid) -> Result<SpectralCurve> {
    let s = Spectra::new(params)?;
    Ok(SpectralCurve::sample(CurveKind::Power, grid, |w| s.inelastic(w)))
}

/// Weight of the elastic line at zero frequency, `(gamma/2) |alpha_c|^2 = gamma phi / U`.
///
/// Zero below threshold; `None` above threshold when `U = 0`.
pub fn elastic_weight(params: &ModelParams) -> Result<Option<f64>> {
    let phi = steady_order_parameter(params)?;
    if phi == 0.0 {
        Ok(Some(0.0))
    } else if params.kerr > 0.0 {
        Ok(Some(params.gamma * phi / params.kerr))
    } else {
        Ok(None)
    }
}

/// `gamma^2 / (4 omega^2 + Delta_G^2)` just below threshold.
pub fn near_critical_power_spectrum(
    gamma: f64,
    delta_g: f64,
    grid: &FrequencyGrid,
) -> Result<SpectralCurve> {
    if !(gamma > 0.0) || !(delta_g > 0.0 && delta_g < gamma) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < Delta_G < gamma, got Delta_G = {delta_g}, gamma = {gamma}"
        )));
    }
    let mut c = SpectralCurve::sample(CurveKind::Power, grid, |w| {
        gamma * gamma / (4.0 * w * w + delta_g * delta_g)
    });
    c.delta_g = Some(delta_g);
    Ok(c)
}

/// The `|G| -> gamma` limit of the inelastic spectrum; `omega = 0` is masked.
pub fn critical_power_spectrum(gamma: f64, grid: &FrequencyGrid) -> Result<SpectralCurve> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter("gamma must be positive".into()));
    }
    let mut c = SpectralCurve::sample(CurveKind::Power, grid, |w| power_below(gamma, gamma, w));
    mask_non_finite(&mut c);
    c.delta_g = Some(0.0);
    Ok(c)
}

/// The `|G| -> gamma` limit of the effective distribution; `omega = 0` is masked.
pub fn critical_effective_distribution(gamma: f64, grid: &FrequencyGrid) -> Result<SpectralCurve> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter("gamma must be positive".into()));
    }
    let mut c = SpectralCurve::sample(CurveKind::HFunction, grid, |w| h_below(gamma, gamma, w));
    mask_non_finite(&mut c);
    Ok(c)
}

fn mask_non_finite(c: &mut SpectralCurve) {
    for (i, v) in c.values.iter_mut().enumerate() {
        if !v.is_finite() {
            *v = f64::NAN;
            c.masked.push(i);
        }
    }
}

/// `h(omega) = g_K / (g_R - g_A)`; above threshold the point `omega = -2 phi`
/// is masked.
pub fn effective_distribution(params: &ModelParams, grid: &FrequencyGrid) -> Result<SpectralCurve> {
    let s = Spectra::new(params)?;
    let mut c = SpectralCurve::sample(CurveKind::HFunction, grid, |w| s.h_tilde(w));
    if s.phi > 0.0 {
        let tol = 1e-12 * (1.0 + 2.0 * s.phi);
        for (i, &w) in c.omegas.iter().enumerate() {
            if (w + 2.0 * s.phi).abs() <= tol {
                c.values[i] = f64::NAN;
                c.masked.push(i);
            }
        }
    }
    mask_non_finite(&mut c);
    c.masked.sort_unstable();
    c.masked.dedup();
    Ok(c)
}

fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

fn grid_argmax(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> (f64, f64) {
    let step = (hi - lo) / (n - 1) as f64;
    let mut best = (lo, f(lo));
    for k in 1..n {
        let w = lo + step * k as f64;
        let v = f(w);
        if v > best.1 {
            best = (w, v);
        }
    }
    let a = (best.0 - step).max(lo);
    let b = (best.0 + step).min(hi);
    let x = golden_max(f, a, b, 1e-10);
    if f(x) >= best.1 {
        (x, f(x))
    } else {
        best
    }
}

/// Frequency of the absorption maximum: zero below threshold and at
/// criticality, located by grid scan plus golden-section refinement above.
pub fn peak_location(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    if !params.is_resonant() {
        return Err(Error::NonResonant(params.omega_d));
    }
    match params.regime() {
        Regime::Below | Regime::Critical => Ok(0.0),
        Regime::Above => {
            let s = Spectra::new(params)?;
            let reach = 4.0 * s.phi + 5.0 * params.gamma;
            let f = |w: f64| s.absorption(w);
            Ok(grid_argmax(&f, -reach, reach, 4001).0)
        }
    }
}

fn half_crossing(f: &impl Fn(f64) -> f64, peak: f64, half: f64, dir: f64, limit: f64) -> Result<f64> {
    let mut prev = 0.0;
    let mut step = 1e-7 * limit / FWHM_SEARCH_LIMIT;
    loop {
        let w = peak + dir * step;
        if w.abs() > limit {
            return Err(Error::NoHalfMaximum(limit));
        }
        if f(w) < half {
            // bisect between prev and step
            let (mut lo, mut hi) = (prev, step);
            while hi - lo > 1e-12 * limit.max(1.0) {
                let mid = 0.5 * (lo + hi);
                if f(peak + dir * mid) < half {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(peak + dir * 0.5 * (lo + hi));
        }
        prev = step;
        step *= 1.05;
    }
}

/// Full width at half maximum of the absorption spectrum.
pub fn fwhm(params: &ModelParams) -> Result<f64> {
    let s = Spectra::new(params)?;
    let peak = peak_location(params)?;
    let f = |w: f64| s.absorption(w);
    let half = 0.5 * f(peak);
    let limit = FWHM_SEARCH_LIMIT * params.gamma;
    let right = half_crossing(&f, peak, half, 1.0, limit)?;
    let left = half_crossing(&f, peak, half, -1.0, limit)?;
    Ok(right - left)
}

/// `sqrt(3/2) gamma`: drive above which the inelastic spectrum splits in two.
pub fn two_peak_onset(gamma: f64) -> f64 {
    1.5f64.sqrt() * gamma
}

/// Position of the non-negative-frequency maximum of the inelastic spectrum.
pub fn inelastic_peak(params: &ModelParams) -> Result<f64> {
    let s = Spectra::new(params)?;
    let reach = 4.0 * s.phi + 3.0 * params.gamma;
    let f = |w: f64| s.inelastic(w);
    Ok(grid_argmax(&f, 0.0, reach, 3001).0)
}

/// Locate the splitting of the inelastic spectrum by bisecting on the drive
/// strength for the point where its maximum leaves zero frequency.
pub fn detect_two_peak_onset(gamma: f64, tol: f64) -> Result<f64> {
    if !(gamma > 0.0 && tol > 0.0) {
        return Err(Error::InvalidParameter("gamma and tol must be positive".into()));
    }
    let split = |g: f64| -> Result<bool> {
        let p = ModelParams::resonant(g, 0.0, gamma)?;
        Ok(inelastic_peak(&p)? > 1e-6 * gamma)
    };
    let (mut lo, mut hi) = (gamma * (1.0 + 1e-6), 3.0 * gamma);
    if split(lo)? || !split(hi)? {
        return Err(Error::InvalidData("onset not bracketed".into()));
    }
    while hi - lo > 0.1 * tol {
        let mid = 0.5 * (lo + hi);
        if split(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `int A(omega) d omega` over the window plus the analytic
/// `gamma / (2 pi omega^2)` tails and any point mass.
pub fn spectral_sum_rule(params: &ModelParams) -> Result<f64> {
    let gamma = params.gamma;
    let w = SUM_RULE_WINDOW * gamma;
    let tails = gamma / (PI * w);
    if params.regime() == Regime::Critical {
        let f = |x: f64| gamma / (x * x + gamma * gamma) / (2.0 * PI);
        let q = quad::integrate(f, -w, w, &[0.0], 1e-12, 1e-12)?;
        return Ok(q.value + tails + 0.5);
    }
    let s = Spectra::new(params)?;
    let f = |x: f64| s.absorption(x);
    let q = quad::integrate(f, -w, w, &s.features(), 1e-12, 1e-12)?;
    Ok(q.value + tails)
}

/// Approach-to-criticality exponents from the ordered side and the slow plus
/// fast exponential form of `i g_K(tau)` to lowest order in `g - gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AboveExponents {
    pub nu_n_prime: f64,
    pub nu_t_prime: f64,
    pub gamma: f64,
    pub g: f64,
    /// `2 (g - gamma)`
    pub slow_rate: f64,
}

impl AboveExponents {
    /// `gamma/(8(g-gamma)) exp(-2(g-gamma)|tau|) + exp(-gamma|tau|)/4`.
    pub fn ig_k(&self, tau: f64) -> f64 {
        let d = self.g - self.gamma;
        self.gamma / (8.0 * d) * (-self.slow_rate * tau.abs()).exp()
            + 0.25 * (-self.gamma * tau.abs()).exp()
    }
}

pub fn exponents_from_above(gamma: f64, g: f64) -> Result<AboveExponents> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter("gamma must be positive".into()));
    }
    if !(g > gamma) {
        return Err(Error::BelowThreshold { drive: g, gamma });
    }
    Ok(AboveExponents {
        nu_n_prime: 1.0,
        nu_t_prime: 1.0,
        gamma,
        g,
        slow_rate: 2.0 * (g - gamma),
    })
}
