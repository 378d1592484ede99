//! Least-squares fits on transformed coordinates and the exponent relation
//! between the approach-to-criticality and finite-size exponents.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FitKind {
    /// `y = prefactor * x^exponent`
    Power,
    /// `y = prefactor * exp(exponent * x)`
    Exponential,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    pub kind: FitKind,
    pub exponent: f64,
    pub exponent_stderr: f64,
    pub prefactor: f64,
    /// Coefficient of determination in the transformed coordinates.
    pub r_squared: f64,
    /// Residuals `log y - fitted` in the transformed coordinates.
    pub residuals: Vec<f64>,
}

impl ScalingFit {
    pub fn predict(&self, x: f64) -> f64 {
        match self.kind {
            FitKind::Power => self.prefactor * x.powf(self.exponent),
            FitKind::Exponential => self.prefactor * (self.exponent * x).exp(),
        }
    }
}

struct Line {
    slope: f64,
    intercept: f64,
    slope_stderr: f64,
    r_squared: f64,
    residuals: Vec<f64>,
}

fn ols(xs: &[f64], ys: &[f64]) -> Line {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| y - (intercept + slope * x))
        .collect();
    let ssr: f64 = residuals.iter().map(|r| r * r).sum();
    let scale = ys.iter().fold(0.0f64, |m, y| m.max(y.abs())).max(1.0);
    // residuals at the rounding floor count as an exact fit
    let floor = (64.0 * f64::EPSILON * scale).powi(2) * n;
    let r_squared = if ssr <= floor {
        1.0
    } else if syy > 0.0 {
        (1.0 - ssr / syy).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let slope_stderr = if xs.len() > 2 {
        (ssr / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    Line {
        slope,
        intercept,
        slope_stderr,
        r_squared,
        residuals,
    }
}

fn check_lengths(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidData(format!(
            "length mismatch: {} x values, {} y values",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 3 {
        return Err(Error::InvalidData(format!(
            "need at least 3 points, got {}",
            xs.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::InvalidData("non-finite data".into()));
    }
    let x0 = xs[0];
    if xs.iter().all(|&x| x == x0) {
        return Err(Error::InvalidData("all x values coincide".into()));
    }
    Ok(())
}

/// Ordinary least squares of `ln y` against `ln x`.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<ScalingFit> {
    check_lengths(xs, ys)?;
    if xs.iter().chain(ys).any(|&v| v <= 0.0) {
        return Err(Error::InvalidData("power-law fit needs positive data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let line = ols(&lx, &ly);
    Ok(ScalingFit {
        kind: FitKind::Power,
        exponent: line.slope,
        exponent_stderr: line.slope_stderr,
        prefactor: line.intercept.exp(),
        r_squared: line.r_squared,
        residuals: line.residuals,
    })
}

/// Ordinary least squares of `ln y` against `x`.
pub fn fit_exponential(xs: &[f64], ys: &[f64]) -> Result<ScalingFit> {
    check_lengths(xs, ys)?;
    if ys.iter().any(|&v| v <= 0.0) {
        return Err(Error::InvalidData("exponential fit needs positive y".into()));
    }
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let line = ols(xs, &ly);
    Ok(ScalingFit {
        kind: FitKind::Exponential,
        exponent: line.slope,
        exponent_stderr: line.slope_stderr,
        prefactor: line.intercept.exp(),
        r_squared: line.r_squared,
        residuals: line.residuals,
    })
}

/// Straight line `y = intercept + slope x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub slope_stderr: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub residuals: Vec<f64>,
}

/// Ordinary least squares on untransformed coordinates.
pub fn fit_linear(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    check_lengths(xs, ys)?;
    let line = ols(xs, ys);
    Ok(LinearFit {
        slope: line.slope,
        slope_stderr: line.slope_stderr,
        intercept: line.intercept,
        r_squared: line.r_squared,
        residuals: line.residuals,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelationCheck {
    pub holds: bool,
    /// `eta_t * nu_n - nu_t * eta_n`
    pub residual: f64,
}

/// Check `eta_t * nu_n = nu_t * eta_n` to within `tol`.
pub fn exponent_relation(nu_n: f64, nu_t: f64, eta_n: f64, eta_t: f64, tol: f64) -> RelationCheck {
    let residual = eta_t * nu_n - nu_t * eta_n;
    RelationCheck {
        holds: residual.abs() <= tol,
        residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_power_law() {
        let xs: Vec<f64> = (1..=10).map(|k| k as f64 * 0.37).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x.powf(0.667)).collect();
        let fit = fit_power_law(&xs, &ys).unwrap();
        assert!((fit.exponent - 0.667).abs() < 1e-12);
        assert!((fit.prefactor - 2.0).abs() < 1e-12);
        assert_eq!(fit.r_squared, 1.0);
        assert!((fit.predict(3.0) - 2.0 * 3f64.powf(0.667)).abs() < 1e-12);
    }

    #[test]
    fn exact_exponential() {
        let xs: Vec<f64> = (0..12).map(|k| k as f64 * 0.8 - 2.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (-0.3 * x).exp()).collect();
        let fit = fit_exponential(&xs, &ys).unwrap();
        assert!((fit.exponent + 0.3).abs() < 1e-12);
        assert!((fit.prefactor - 1.0).abs() < 1e-12);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn noisy_fit_has_error_bar() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        let ys = [1.0, 2.2, 2.9, 4.3, 4.8];
        let fit = fit_power_law(&xs, &ys).unwrap();
        assert!(fit.r_squared < 1.0 && fit.r_squared > 0.9);
        assert!(fit.exponent_stderr > 0.0);
        assert_eq!(fit.residuals.len(), 5);
    }

    #[test]
    fn rejects_bad_data() {
        assert!(fit_power_law(&[1.0, 2.0, 3.0], &[1.0, -1.0, 2.0]).is_err());
        assert!(fit_power_law(&[0.0, 2.0, 3.0], &[1.0, 1.0, 2.0]).is_err());
        assert!(fit_power_law(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(fit_exponential(&[-1.0, 0.0, 1.0], &[1.0, 0.0, 2.0]).is_err());
        assert!(fit_exponential(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(fit_exponential(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn relation_examples() {
        let r = exponent_relation(1.0, 1.0, 2.0 / 3.0, 2.0 / 3.0, 1e-12);
        assert!(r.holds);
        assert_eq!(r.residual, 0.0);
        assert!(!exponent_relation(1.0, 1.0, 2.0 / 3.0, 0.5, 1e-3).holds);
    }

    proptest! {
        #[test]
        fn scaling_y_changes_only_prefactor(c in 0.01..100.0f64, e in -2.0..2.0f64) {
            let xs: Vec<f64> = (1..8).map(|k| k as f64).collect();
            let ys: Vec<f64> = xs.iter().map(|x| x.powf(e) * (1.0 + 0.1 * (x * 7.0).sin())).collect();
            let scaled: Vec<f64> = ys.iter().map(|y| c * y).collect();
            let a = fit_power_law(&xs, &ys).unwrap();
            let b = fit_power_law(&xs, &scaled).unwrap();
            prop_assert!((a.exponent - b.exponent).abs() < 1e-12);
            prop_assert!((b.prefactor / a.prefactor - c).abs() < 1e-9 * c);
        }

        #[test]
        fn r_squared_in_unit_interval(ys in proptest::collection::vec(0.01..10.0f64, 3..20)) {
            let xs: Vec<f64> = (0..ys.len()).map(|k| k as f64).collect();
            let fit = fit_exponential(&xs, &ys).unwrap();
            prop_assert!((0.0..=1.0).contains(&fit.r_squared));
        }
    }
}
