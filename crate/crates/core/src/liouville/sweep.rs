use rayon::prelude::*;
use serde::Serialize;

use super::operators::{build_hamiltonian, build_liouvillian_capped, DEFAULT_DIM_CAP};
use super::spectrum::{diagonalize, observable_n, tail_weight};
use crate::error::{Error, Result};
use crate::meanfield::steady_order_parameter;
use crate::params::{ModelParams, Regime};

/// Number of leading eigenvalues reported per sweep point.
pub const REPORTED_EIGENVALUES: usize = 6;
/// Tail weight of the steady state above which a point is flagged.
pub const UNRELIABLE_TAIL: f64 = 1e-3;

/// Fock cutoff chosen from the expected occupation.
///
/// `n_max = max(floor, ceil(multiplier * n_est))`, lowered to the largest
/// value whose superoperator fits within `dim_cap`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CutoffRule {
    pub multiplier: f64,
    pub floor: usize,
    pub dim_cap: usize,
}

impl Default for CutoffRule {
    fn default() -> Self {
        Self {
            multiplier: 3.0,
            floor: 40,
            dim_cap: DEFAULT_DIM_CAP,
        }
    }
}

/// Expected photon number used to size the cutoff.
pub fn estimated_occupation(params: &ModelParams) -> f64 {
    let g = params.drive_strength();
    let gamma = params.gamma;
    match params.regime() {
        Regime::Below => g * g / (2.0 * (gamma * gamma - g * g)),
        Regime::Above => 0.5 * ((g - gamma) * (g + gamma)).sqrt() / params.kerr,
        Regime::Critical => 1.2 * (1.0 / params.kerr).powf(2.0 / 3.0),
    }
}

impl CutoffRule {
    /// The cutoff and whether the dimension cap lowered it.
    pub fn n_max(&self, params: &ModelParams) -> (usize, bool) {
        let est = estimated_occupation(params);
        let wanted = if est.is_finite() {
            ((self.multiplier * est).ceil() as usize).max(self.floor)
        } else {
            usize::MAX
        };
        let largest = (self.dim_cap as f64).sqrt().floor() as usize - 1;
        if wanted > largest {
            (largest, true)
        } else {
            (wanted, false)
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub enum NmaxRule {
    Auto(CutoffRule),
    Fixed(usize),
}

impl Default for NmaxRule {
    fn default() -> Self {
        NmaxRule::Auto(CutoffRule::default())
    }
}

/// One exact-diagonalization point of a finite-size sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub inv_u: f64,
    pub kerr: f64,
    pub n_max: usize,
    /// `<a^dag a>` in the stationary state.
    pub occupation: f64,
    /// `U <a^dag a>`.
    pub phi_ed: f64,
    pub phi_mf: f64,
    pub phi_deviation: f64,
    /// `-Re lambda_1`.
    pub gap: f64,
    /// Real parts of the leading eigenvalues, `lambda_0` first.
    pub leading_re: Vec<f64>,
    pub leading_im: Vec<f64>,
    /// The cutoff rule asked for more levels than the dimension cap allows.
    pub clamped: bool,
    pub tail_weight: f64,
    pub unreliable: bool,
}

/// One diagonalization at a single Kerr strength.
pub fn sweep_point(drive: f64, gamma: f64, inv_u: f64, rule: NmaxRule) -> Result<SweepRow> {
    if !(inv_u > 0.0 && inv_u.is_finite()) {
        return Err(Error::InvalidParameter(format!("1/U must be positive, got {inv_u}")));
    }
    let kerr = 1.0 / inv_u;
    let params = ModelParams::resonant(drive, kerr, gamma)?;
    let (n_max, clamped, cap) = match rule {
        NmaxRule::Auto(r) => {
            let (n, c) = r.n_max(&params);
            (n, c, r.dim_cap)
        }
        NmaxRule::Fixed(n) => (n, false, usize::MAX),
    };
    let l = build_liouvillian_capped(&params, n_max, cap)?;
    let spec = diagonalize(&l, 1)?;
    let sigma0 = &spec.eigenmatrices[0];
    let ops = build_hamiltonian(&params, n_max)?;
    let occupation = observable_n(sigma0, &ops);
    let phi_ed = kerr * occupation;
    let phi_mf = steady_order_parameter(&params)?;
    let tail = tail_weight(sigma0);
    let k = REPORTED_EIGENVALUES.min(spec.eigenvalues.len());
    Ok(SweepRow {
        inv_u,
        kerr,
        n_max,
        occupation,
        phi_ed,
        phi_mf,
        phi_deviation: (phi_ed - phi_mf).abs(),
        gap: spec.gap(),
        leading_re: spec.eigenvalues[..k].iter().map(|z| z.re).collect(),
        leading_im: spec.eigenvalues[..k].iter().map(|z| z.im).collect(),
        clamped,
        tail_weight: tail,
        unreliable: tail >= UNRELIABLE_TAIL,
    })
}

/// Diagonalize at every `1/U` in the list; rows follow the input order.
pub fn finite_size_sweep(drive: f64, gamma: f64, inv_u_list: &[f64], rule: NmaxRule) -> Result<Vec<SweepRow>> {
    if inv_u_list.is_empty() {
        return Err(Error::InvalidParameter("1/U list is empty".into()));
    }
    inv_u_list
        .par_iter()
        .map(|&inv_u| sweep_point(drive, gamma, inv_u, rule))
        .collect()
}
