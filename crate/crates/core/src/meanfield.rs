//! Mean-field dynamics of the cavity amplitude and the PT-symmetric
//! stability matrix that drives it onto the stationary line.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Amplitude guard above which an integration step is rejected.
pub const OVERFLOW_GUARD: f64 = 1e6;

/// A symmetry-broken (or trivial) mean-field steady state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanFieldState {
    pub alpha: C64,
    /// Order parameter `U |alpha|^2`.
    pub phi: f64,
    /// Phase of `alpha`.
    pub theta: f64,
}

/// `d alpha/dt = (i omega_d - i U |alpha|^2 - gamma/2) alpha - i (G/2) alpha^*`.
pub fn mf_rhs(alpha: C64, params: &ModelParams) -> C64 {
    let i = C64::i();
    let n = alpha.norm_sqr();
    (i * params.omega_d - i * params.kerr * n - 0.5 * params.gamma) * alpha
        - i * 0.5 * params.drive * alpha.conj()
}

/// Fixed-step classical RK4 integration of [`mf_rhs`].
///
/// Returns `(t, alpha)` samples including the initial point. The step is
/// shrunk slightly so that the last sample lands on `t_final`.
pub fn integrate_mf(
    alpha0: C64,
    params: &ModelParams,
    t_final: f64,
    dt: f64,
) -> Result<Vec<(f64, C64)>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "t_final must be non-negative, got {t_final}"
        )));
    }
    let steps = ((t_final / dt) - 1e-9).ceil().max(0.0) as usize;
    let h = if steps == 0 { 0.0 } else { t_final / steps as f64 };
    let mut out = Vec::with_capacity(steps + 1);
    let mut alpha = alpha0;
    out.push((0.0, alpha));
    for step in 1..=steps {
        let k1 = mf_rhs(alpha, params);
        let k2 = mf_rhs(alpha + 0.5 * h * k1, params);
        let k3 = mf_rhs(alpha + 0.5 * h * k2, params);
        let k4 = mf_rhs(alpha + h * k3, params);
        alpha += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        let mag = alpha.norm();
        if !(mag <= OVERFLOW_GUARD) {
            return Err(Error::Diverged {
                step,
                trajectory: None,
                value: mag,
            });
        }
        out.push((step as f64 * h, alpha));
    }
    Ok(out)
}

/// Resonant order parameter `phi = U n`: zero up to and including
/// `|G| = gamma`, `sqrt(|G|^2 - gamma^2)/2` above.
pub fn steady_order_parameter(params: &ModelParams) -> Result<f64> {
    if !params.is_resonant() {
        return Err(Error::NonResonant(params.omega_d));
    }
    let g = params.drive_strength();
    let gamma = params.gamma;
    if g <= gamma {
        Ok(0.0)
    } else {
        Ok(0.5 * ((g - gamma) * (g + gamma)).sqrt())
    }
}

/// Every stationary order parameter listed by the mean-field analysis for
/// arbitrary detuning, in ascending order.
///
/// The vacuum is listed while it is linearly stable
/// (`|G|^2 <= gamma^2 + 4 omega_d^2`); the non-trivial branch
/// `omega_d + sqrt(|G|^2 - gamma^2)/2` whenever it is non-negative and
/// `|G| >= gamma`. No stability label is attached to the bistable window.
pub fn admissible_order_parameters(params: &ModelParams) -> Vec<f64> {
    let g = params.drive_strength();
    let gamma = params.gamma;
    let wd = params.omega_d;
    let mut out = Vec::with_capacity(2);
    if g * g <= gamma * gamma + 4.0 * wd * wd {
        out.push(0.0);
    }
    if g >= gamma {
        let phi = wd + 0.5 * ((g - gamma) * (g + gamma)).sqrt();
        let vacuum_listed = !out.is_empty();
        if phi > 0.0 || (phi == 0.0 && !vacuum_listed) {
            out.push(phi);
        }
    }
    out
}

/// Occupations `n = phi / U` for [`admissible_order_parameters`].
pub fn admissible_occupations(params: &ModelParams) -> Result<Vec<f64>> {
    let phis = admissible_order_parameters(params);
    if phis.iter().any(|&p| p > 0.0) && params.kerr <= 0.0 {
        return Err(Error::InvalidParameter(
            "occupation of the non-trivial branch needs U > 0".into(),
        ));
    }
    Ok(phis
        .into_iter()
        .map(|p| if p == 0.0 { 0.0 } else { p / params.kerr })
        .collect())
}

/// `exp(2 i theta) = -(sqrt(|G|^2 - gamma^2) + i gamma) / G^*` above threshold.
pub fn steady_phase(params: &ModelParams) -> Result<C64> {
    if !params.is_resonant() {
        return Err(Error::NonResonant(params.omega_d));
    }
    let g = params.drive_strength();
    if g <= params.gamma {
        return Err(Error::BelowThreshold {
            drive: g,
            gamma: params.gamma,
        });
    }
    let root = ((g - params.gamma) * (g + params.gamma)).sqrt();
    Ok(-C64::new(root, params.gamma) / params.drive.conj())
}

/// The two symmetry-broken amplitudes `+- sqrt(n) exp(i theta)`.
pub fn steady_amplitudes(params: &ModelParams) -> Result<[MeanFieldState; 2]> {
    let phase2 = steady_phase(params)?;
    if params.kerr <= 0.0 {
        return Err(Error::InvalidParameter(
            "steady amplitudes need U > 0".into(),
        ));
    }
    let phi = steady_order_parameter(params)?;
    let n = phi / params.kerr;
    let theta = 0.5 * phase2.arg();
    let alpha = C64::from_polar(n.sqrt(), theta);
    let other = -alpha;
    Ok([
        MeanFieldState { alpha, phi, theta },
        MeanFieldState {
            alpha: other,
            phi,
            theta: other.arg(),
        },
    ])
}

/// The 2x2 stability matrix of the mean-field flow at fixed `phi`, with its
/// eigenvalues `Gamma_+- = -gamma/2 +- xi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PTMatrix {
    pub m: [[C64; 2]; 2],
    pub gamma_plus: C64,
    pub gamma_minus: C64,
    /// `sqrt(|G|^2 - 4 phi^2) / 2`: real on the unbroken side, imaginary on the broken side.
    pub xi: C64,
}

impl PTMatrix {
    /// Eigenvalues from the characteristic polynomial of `m`, independent of `xi`.
    pub fn characteristic_eigenvalues(&self) -> [C64; 2] {
        let [[a, b], [c, d]] = self.m;
        let tr = a + d;
        let det = a * d - b * c;
        let disc = (0.25 * tr * tr - det).sqrt();
        let (l1, l2) = (0.5 * tr + disc, 0.5 * tr - disc);
        if l1.re >= l2.re {
            [l1, l2]
        } else {
            [l2, l1]
        }
    }

    pub fn is_exceptional(&self, tol: f64) -> bool {
        (self.gamma_plus - self.gamma_minus).norm() < tol
    }
}

/// Stability matrix `M = [[-i phi - gamma/2, -i G/2], [i G^*/2, i phi - gamma/2]]`
/// acting on `(alpha, alpha^*)`.
pub fn pt_eigenvalues(phi: f64, params: &ModelParams) -> Result<PTMatrix> {
    if !(phi >= 0.0 && phi.is_finite()) {
        return Err(Error::InvalidParameter(format!("phi must be >= 0, got {phi}")));
    }
    let i = C64::i();
    let half_gamma = 0.5 * params.gamma;
    let g = params.drive;
    let m = [
        [-i * phi - half_gamma, -i * 0.5 * g],
        [i * 0.5 * g.conj(), i * phi - half_gamma],
    ];
    let gabs = params.drive_strength();
    // factorized so that |G| = 2 phi gives exactly zero
    let disc = (gabs - 2.0 * phi) * (gabs + 2.0 * phi);
    let xi = if disc >= 0.0 {
        C64::new(0.5 * disc.sqrt(), 0.0)
    } else {
        C64::new(0.0, 0.5 * (-disc).sqrt())
    };
    let base = C64::new(-half_gamma, 0.0);
    Ok(PTMatrix {
        m,
        gamma_plus: base + xi,
        gamma_minus: base - xi,
        xi,
    })
}

/// `Re Gamma_+` sampled on a `(|G|, phi)` grid.
#[derive(Debug, Clone, Serialize)]
pub struct FlowField {
    pub phis: Vec<f64>,
    pub drives: Vec<f64>,
    /// `values[i_drive][i_phi]`.
    pub values: Vec<Vec<f64>>,
    /// `(|G|, phi = |G|/2)` for each drive node.
    pub exceptional_line: Vec<(f64, f64)>,
    /// `(|G|, phi = sqrt(|G|^2 - gamma^2)/2)` for drive nodes above threshold.
    pub stable_line: Vec<(f64, f64)>,
    pub gamma: f64,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| (lo * (n - 1 - i) as f64 + hi * i as f64) / (n - 1) as f64)
        .collect()
}

/// Evaluate `Re Gamma_+` over `phi_range x drive_range` with `(n_phi, n_drive)` nodes.
pub fn flow_field(
    phi_range: (f64, f64),
    drive_range: (f64, f64),
    resolution: (usize, usize),
    gamma: f64,
) -> Result<FlowField> {
    let (n_phi, n_drive) = resolution;
    if n_phi == 0 || n_drive == 0 {
        return Err(Error::InvalidParameter("flow field needs at least one node".into()));
    }
    for (lo, hi) in [phi_range, drive_range] {
        if !(lo >= 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "ranges must be non-negative and ordered, got [{lo}, {hi}]"
            )));
        }
    }
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter("gamma must be positive".into()));
    }
    let phis = linspace(phi_range.0, phi_range.1, n_phi);
    let drives = linspace(drive_range.0, drive_range.1, n_drive);
    let values = drives
        .par_iter()
        .map(|&g| {
            let p = ModelParams {
                omega_d: 0.0,
                kerr: 0.0,
                drive: C64::new(g, 0.0),
                gamma,
            };
            phis.iter()
                .map(|&phi| pt_eigenvalues(phi, &p).map(|m| m.gamma_plus.re))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let exceptional_line = drives.iter().map(|&g| (g, 0.5 * g)).collect();
    let stable_line = drives
        .iter()
        .filter(|&&g| g > gamma)
        .map(|&g| (g, 0.5 * ((g - gamma) * (g + gamma)).sqrt()))
        .collect();
    Ok(FlowField {
        phis,
        drives,
        values,
        exceptional_line,
        stable_line,
        gamma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn res(g: f64) -> ModelParams {
        ModelParams::resonant(g, 0.05, 1.0).unwrap()
    }

    #[test]
    fn rhs_examples() {
        assert_eq!(mf_rhs(C64::new(0.0, 0.0), &res(1.3)), C64::new(0.0, 0.0));
        let p = ModelParams::resonant(0.0, 0.0, 1.0).unwrap();
        assert_eq!(mf_rhs(C64::new(1.0, 0.0), &p), C64::new(-0.5, 0.0));
    }

    #[test]
    fn steady_amplitudes_are_fixed_points() {
        for g in [1.2, C64::new(0.0, 1.2).norm(), 1.7, 3.0] {
            for drive in [C64::new(g, 0.0), C64::new(0.0, g), C64::from_polar(g, 0.7)] {
                let p = ModelParams::new(0.0, 0.03, drive, 1.0).unwrap();
                for s in steady_amplitudes(&p).unwrap() {
                    assert!(mf_rhs(s.alpha, &p).norm() < 1e-12, "residual at G={drive}");
                    assert!((p.kerr * s.alpha.norm_sqr() - s.phi).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn order_parameter_examples() {
        assert_eq!(steady_order_parameter(&res(0.8)).unwrap(), 0.0);
        assert_eq!(steady_order_parameter(&res(1.0)).unwrap(), 0.0);
        let phi = steady_order_parameter(&res(1.2)).unwrap();
        assert!((phi - 0.44f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((phi - 0.331_662_479).abs() < 1e-9);
        let detuned = ModelParams::new(0.3, 0.05, C64::new(1.2, 0.0), 1.0).unwrap();
        assert!(matches!(
            steady_order_parameter(&detuned),
            Err(Error::NonResonant(_))
        ));
    }

    #[test]
    fn admissible_three_cases() {
        let wd = 0.5;
        let upper = (1.0f64 + 4.0 * wd * wd).sqrt();
        let mk = |g: f64| ModelParams::new(wd, 0.1, C64::new(g, 0.0), 1.0).unwrap();
        assert_eq!(admissible_order_parameters(&mk(0.9)), vec![0.0]);
        let mid = admissible_order_parameters(&mk(1.1));
        assert_eq!(mid.len(), 2);
        assert_eq!(mid[0], 0.0);
        assert!((mid[1] - (wd + 0.5 * (1.21f64 - 1.0).sqrt())).abs() < 1e-15);
        let high = admissible_order_parameters(&mk(upper + 0.2));
        assert_eq!(high.len(), 1);
        assert!(high[0] > 0.0);
        // resonant case reduces to the two-branch formula
        assert_eq!(admissible_order_parameters(&res(1.0)), vec![0.0]);
        let occ = admissible_occupations(&mk(1.1)).unwrap();
        assert!((occ[1] - mid[1] / 0.1).abs() < 1e-12);
        // every listed non-trivial branch solves the modulus condition
        let p = mk(1.1);
        let phi = mid[1];
        let lhs = (wd - phi).powi(2) + 0.25;
        assert!((lhs - 0.25 * 1.21).abs() < 1e-12);
        let _ = p;
    }

    #[test]
    fn phase_examples() {
        let e = steady_phase(&res(1.2)).unwrap();
        assert!((e - C64::new(-0.552_771, -0.833_333)).norm() < 1e-6);
        assert!((e.norm() - 1.0).abs() < 1e-12);
        let p = ModelParams::new(0.0, 0.05, C64::new(0.0, 1.2), 1.0).unwrap();
        let e = steady_phase(&p).unwrap();
        // direct evaluation with G^* = -1.2 i
        let direct = -C64::new(0.44f64.sqrt(), 1.0) / C64::new(0.0, -1.2);
        assert!((e - direct).norm() < 1e-15);
        let s = steady_amplitudes(&p).unwrap();
        assert!(mf_rhs(s[0].alpha, &p).norm() < 1e-12);
        assert!(matches!(
            steady_phase(&res(0.9)),
            Err(Error::BelowThreshold { .. })
        ));
        assert!(steady_phase(&res(1.0)).is_err());
    }

    #[test]
    fn integrate_converges_above_threshold() {
        // phi does not depend on U; a unit Kerr keeps the growth phase short
        let p = ModelParams::resonant(1.2, 1.0, 1.0).unwrap();
        let traj = integrate_mf(C64::new(0.01, 0.01), &p, 200.0, 0.01).unwrap();
        let (t, a) = *traj.last().unwrap();
        assert!((t - 200.0).abs() < 1e-9);
        let phi = p.kerr * a.norm_sqr();
        assert!((phi - 0.44f64.sqrt() / 2.0).abs() < 1e-6, "phi = {phi}");
    }

    #[test]
    fn integrate_decays_below_threshold() {
        let p = res(0.8);
        let traj = integrate_mf(C64::new(0.01, 0.0), &p, 200.0, 0.01).unwrap();
        assert!(traj.last().unwrap().1.norm() < 1e-8);
    }

    #[test]
    fn integrate_z2_equivariant() {
        let p = res(1.4);
        let a = integrate_mf(C64::new(0.2, -0.1), &p, 20.0, 0.01).unwrap();
        let b = integrate_mf(C64::new(-0.2, 0.1), &p, 20.0, 0.01).unwrap();
        for ((_, x), (_, y)) in a.iter().zip(&b) {
            assert_eq!(*x, -*y);
        }
    }

    #[test]
    fn integrate_guards() {
        let p = res(1.2);
        assert!(integrate_mf(C64::new(0.1, 0.0), &p, 1.0, 0.0).is_err());
        assert!(integrate_mf(C64::new(0.1, 0.0), &p, -1.0, 0.1).is_err());
        let blow = integrate_mf(C64::new(10.0, 0.0), &p, 10.0, 5.0);
        assert!(matches!(blow, Err(Error::Diverged { .. })));
        let zero = integrate_mf(C64::new(0.1, 0.0), &p, 0.0, 0.1).unwrap();
        assert_eq!(zero.len(), 1);
    }

    #[test]
    fn pt_examples() {
        let p = res(1.0);
        let m = pt_eigenvalues(0.5, &p).unwrap();
        assert!(m.is_exceptional(1e-15));
        assert_eq!(m.gamma_plus, C64::new(-0.5, 0.0));

        let m = pt_eigenvalues(0.0, &p).unwrap();
        assert!((m.gamma_plus - C64::new(0.0, 0.0)).norm() < 1e-15);
        assert!((m.gamma_minus - C64::new(-1.0, 0.0)).norm() < 1e-15);

        let m = pt_eigenvalues(0.25, &p).unwrap();
        assert!((m.gamma_plus.re + 0.066_987_298).abs() < 1e-8);
        assert!((m.gamma_minus.re + 0.933_012_702).abs() < 1e-8);
        assert!(pt_eigenvalues(-0.1, &p).is_err());
    }

    #[test]
    fn flow_field_examples() {
        let ff = flow_field((0.0, 1.5), (0.0, 3.0), (31, 61), 1.0).unwrap();
        assert_eq!(ff.values.len(), 61);
        assert_eq!(ff.values[0].len(), 31);
        // origin: undriven decay
        assert_eq!(ff.values[0][0], -0.5);
        for (ig, &g) in ff.drives.iter().enumerate() {
            for (ip, &phi) in ff.phis.iter().enumerate() {
                if g < 2.0 * phi {
                    assert_eq!(ff.values[ig][ip], -0.5);
                }
            }
        }
        for &(g, phi) in &ff.stable_line {
            let m = pt_eigenvalues(phi, &ModelParams::resonant(g, 0.0, 1.0).unwrap()).unwrap();
            assert!(m.gamma_plus.re.abs() < 1e-10);
        }
        assert!(flow_field((1.0, 0.0), (0.0, 1.0), (3, 3), 1.0).is_err());
    }

    proptest! {
        #[test]
        fn rhs_is_odd(re in -5.0..5.0f64, im in -5.0..5.0f64, g in 0.0..3.0f64, wd in -1.0..1.0f64) {
            let p = ModelParams::new(wd, 0.1, C64::from_polar(g, 0.3), 1.0).unwrap();
            let a = C64::new(re, im);
            prop_assert_eq!(mf_rhs(-a, &p), -mf_rhs(a, &p));
        }

        #[test]
        fn pt_spectrum_structure(phi in 0.0..3.0f64, g in 0.0..4.0f64, arg in -3.0..3.0f64, gamma in 0.2..3.0f64) {
            let p = ModelParams::new(0.0, 0.0, C64::from_polar(g, arg), gamma).unwrap();
            let m = pt_eigenvalues(phi, &p).unwrap();
            let sum = m.gamma_plus + m.gamma_minus;
            prop_assert!((sum.re + gamma).abs() < 1e-12);
            prop_assert_eq!(sum.im, 0.0);
            prop_assert!(m.gamma_plus.re >= m.gamma_minus.re);
            // consistent with the matrix itself
            let ev = m.characteristic_eigenvalues();
            let scale = 1.0 + g + phi + gamma;
            let close = |a: C64, b: C64| (a - b).norm() < 1e-7 * scale;
            prop_assert!(
                (close(ev[0], m.gamma_plus) && close(ev[1], m.gamma_minus))
                    || (close(ev[0], m.gamma_minus) && close(ev[1], m.gamma_plus))
            );
        }

        #[test]
        fn self_stabilizing_sign(g in 1.01..4.0f64, frac in 0.0..1.0f64) {
            let p = ModelParams::resonant(g, 0.0, 1.0).unwrap();
            let line = 0.5 * (g * g - 1.0).sqrt();
            // below the stationary line (and |G| > 2 phi) the amplitude grows
            let below = line * frac * 0.999;
            prop_assert!(pt_eigenvalues(below, &p).unwrap().gamma_plus.re > 0.0);
            // above the line it decays
            let above = line + 0.01 + frac;
            prop_assert!(pt_eigenvalues(above, &p).unwrap().gamma_plus.re < 0.0);
        }
    }
}
