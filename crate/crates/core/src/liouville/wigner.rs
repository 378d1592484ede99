use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::Serialize;

use super::spectrum::tail_weight;
use crate::error::{Error, Result};

/// Hermiticity tolerance for states passed to [`wigner`].
pub const HERMITIAN_TOL: f64 = 1e-8;
/// Weight in the top tenth of Fock levels above which the grid is flagged.
pub const TAIL_WARNING: f64 = 1e-3;

/// Rectangular phase-space grid.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nx: usize,
    pub np: usize,
}

impl PhaseGrid {
    pub fn symmetric(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) || n < 2 {
            return Err(Error::InvalidParameter(format!(
                "phase grid needs half_width > 0 and n >= 2, got {half_width} and {n}"
            )));
        }
        Ok(Self {
            x_min: -half_width,
            x_max: half_width,
            p_min: -half_width,
            p_max: half_width,
            nx: n,
            np: n,
        })
    }

    /// `[-L, L]^2` with `L = 0.8 sqrt(2 n_max)` and 201 points per axis.
    pub fn default_for(n_max: usize) -> Self {
        Self::symmetric(0.8 * (2.0 * n_max as f64).sqrt(), 201).expect("n_max >= 1")
    }

    fn axis(min: f64, max: f64, n: usize) -> Vec<f64> {
        let h = (max - min) / (n - 1) as f64;
        (0..n)
            .map(|i| {
                // mirror-exact about the centre
                let j = n - 1 - i;
                if i <= j {
                    min + h * i as f64
                } else {
                    max - h * j as f64
                }
            })
            .collect()
    }
}

/// Wigner function sampled on a grid; `values[[ip, ix]]`.
#[derive(Debug, Clone)]
pub struct WignerGrid {
    pub xs: Vec<f64>,
    pub ps: Vec<f64>,
    pub values: Array2<f64>,
    pub tail_weight: f64,
    pub tail_warning: bool,
}

impl WignerGrid {
    /// Trapezoidal `sum W dx dp`.
    pub fn integral(&self) -> f64 {
        let w = |v: &[f64], i: usize| {
            let n = v.len();
            let h = (v[n - 1] - v[0]) / (n - 1) as f64;
            if i == 0 || i == n - 1 {
                0.5 * h
            } else {
                h
            }
        };
        let mut s = 0.0;
        for (ip, row) in self.values.outer_iter().enumerate() {
            let wp = w(&self.ps, ip);
            for (ix, v) in row.iter().enumerate() {
                s += v * wp * w(&self.xs, ix);
            }
        }
        s
    }

    /// `max |W(x,p) - s W(-x,-p)|` for `s = +1` or `-1`.
    pub fn inversion_residual(&self, sign: f64) -> f64 {
        let (np, nx) = self.values.dim();
        let mut worst = 0.0f64;
        for ip in 0..np {
            for ix in 0..nx {
                let a = self.values[[ip, ix]];
                let b = self.values[[np - 1 - ip, nx - 1 - ix]];
                worst = worst.max((a - sign * b).abs());
            }
        }
        worst
    }
}

fn ln_factorial_table(n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n + 1];
    for k in 1..=n {
        t[k] = t[k - 1] + (k as f64).ln();
    }
    t
}

/// Wigner function of a Hermitian Fock-basis operator.
///
/// Uses the closed-form kernel of `|m><n|`, an associated Laguerre polynomial
/// times a Gaussian, with `x = (a + a^dag)/sqrt 2`.
pub fn wigner(state: &Array2<C64>, grid: &PhaseGrid) -> Result<WignerGrid> {
    let (d, d2) = state.dim();
    if d != d2 || d == 0 {
        return Err(Error::InvalidData(format!("state must be square, got {d}x{d2}")));
    }
    let mut dev = 0.0f64;
    for r in 0..d {
        for c in 0..d {
            dev = dev.max((state[[r, c]] - state[[c, r]].conj()).norm());
        }
    }
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let xs = PhaseGrid::axis(grid.x_min, grid.x_max, grid.nx);
    let ps = PhaseGrid::axis(grid.p_min, grid.p_max, grid.np);
    let lnf = ln_factorial_table(d);
    let mut values = Array2::<f64>::zeros((grid.np, grid.nx));
    let mut lag = vec![0.0f64; d + 1];
    for (ip, &p) in ps.iter().enumerate() {
        for (ix, &x) in xs.iter().enumerate() {
            let alpha = C64::new(x, p) / std::f64::consts::SQRT_2;
            let r2 = alpha.norm_sqr();
            let arg = 4.0 * r2;
            let ln_gauss = -2.0 * r2;
            let two_conj = 2.0 * alpha.conj();
            let mut total = 0.0;
            for k in 0..d {
                // off-diagonal order k: entries (n + k, n)
                let nterms = d - k;
                laguerre_column(k as f64, arg, nterms, &mut lag);
                // (2 alpha*)^k in polar form, combined with log factorials
                let (mag, phase) = if k == 0 {
                    (0.0, C64::new(1.0, 0.0))
                } else if two_conj.norm() == 0.0 {
                    (f64::NEG_INFINITY, C64::new(1.0, 0.0))
                } else {
                    (
                        k as f64 * two_conj.norm().ln(),
                        C64::from_polar(1.0, k as f64 * two_conj.arg()),
                    )
                };
                if mag == f64::NEG_INFINITY {
                    continue;
                }
                let mut acc = C64::new(0.0, 0.0);
                for n in 0..nterms {
                    let m = n + k;
                    let coeff = (0.5 * (lnf[n] - lnf[m]) + mag + ln_gauss).exp();
                    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                    let kernel = sign * coeff * lag[n];
                    // rho_{mn} multiplies the kernel of |m><n|
                    acc += state[[m, n]] * kernel;
                }
                let term = acc * phase;
                total += if k == 0 { term.re } else { 2.0 * term.re };
            }
            values[[ip, ix]] = total / std::f64::consts::PI;
        }
    }
    let tail = tail_weight(state);
    Ok(WignerGrid {
        xs,
        ps,
        values,
        tail_weight: tail,
        tail_warning: tail >= TAIL_WARNING,
    })
}

/// `L_n^{(k)}(x)` for `n = 0..count` by forward recurrence.
fn laguerre_column(k: f64, x: f64, count: usize, out: &mut [f64]) {
    if count == 0 {
        return;
    }
    out[0] = 1.0;
    if count > 1 {
        out[1] = 1.0 + k - x;
    }
    for n in 1..count.saturating_sub(1) {
        let nf = n as f64;
        out[n + 1] = ((2.0 * nf + 1.0 + k - x) * out[n] - (nf + k) * out[n - 1]) / (nf + 1.0);
    }
}
