//! Stochastic simulation of the quadrature Langevin equations, stationary
//! moments of the effective free energy, and the closed-form predictions for
//! the critical and finite-size exponents.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma as gamma_fn;

use crate::error::{Error, Result};
use crate::quad;

/// Amplitude guard above which a trajectory is declared divergent.
pub const DIVERGENCE_GUARD: f64 = 1e6;
/// Minimum number of batches used for standard errors.
pub const MIN_BATCHES: usize = 20;
/// Number of trajectory groups used for the decay-rate confidence interval.
const RATE_GROUPS: usize = 8;

/// `<x^2> (U/gamma)^{2/3}` at criticality from the sextic free energy,
/// `Gamma(1/2) 48^{1/3} / Gamma(1/6)`.
pub fn x2_prefactor_quadrature() -> f64 {
    gamma_fn(0.5) * 48f64.cbrt() / gamma_fn(1.0 / 6.0)
}

/// The closed form `sqrt(2 pi) 3^{-2/3} / Gamma(7/6)` as printed alongside the
/// sextic free energy; it exceeds [`x2_prefactor_quadrature`] by `2^{1/6}`.
pub fn x2_prefactor_printed() -> f64 {
    (2.0 * PI).sqrt() * 3f64.powf(-2.0 / 3.0) / gamma_fn(7.0 / 6.0)
}

/// `kappa / (gamma (U/gamma)^{2/3})` with the quadrature moment.
pub fn kappa_prefactor_quadrature() -> f64 {
    15.0 / 16.0 * x2_prefactor_quadrature().powi(2)
}

/// `(5/8) 3^{-1/3} pi / Gamma(7/6)^2`, the printed decay-rate prefactor.
pub fn kappa_prefactor_printed() -> f64 {
    5.0 / 8.0 * 3f64.powf(-1.0 / 3.0) * PI / gamma_fn(7.0 / 6.0).powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Drift {
    /// Decoupled Ornstein-Uhlenbeck quadratures.
    Linear,
    /// `x` with the sextic restoring force; `p` stays linear.
    Quintic,
    /// Both cubic couplings `(U/4)(x^2 + p^2)` retained.
    #[serde(rename = "full")]
    FullCoupled,
}

impl std::str::FromStr for Drift {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Drift::Linear),
            "quintic" => Ok(Drift::Quintic),
            "full" | "fullcoupled" | "full-coupled" => Ok(Drift::FullCoupled),
            other => Err(Error::InvalidParameter(format!("unknown drift '{other}'"))),
        }
    }
}

impl std::fmt::Display for Drift {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Drift::Linear => "linear",
            Drift::Quintic => "quintic",
            Drift::FullCoupled => "full",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LangevinConfig {
    /// Real drive `g` (with `G = i g`).
    pub g: f64,
    pub kerr: f64,
    pub dt: f64,
    /// Total steps per trajectory, burn-in included.
    pub n_steps: usize,
    pub burn_in: usize,
    pub n_trajectories: usize,
    pub seed: u64,
    pub drift: Drift,
    /// Steps between stored samples for the autocorrelation.
    pub sample_every: usize,
    /// Largest autocorrelation lag, in units of time.
    pub max_lag: f64,
}

impl LangevinConfig {
    /// Defaults sized from the expected relaxation rate: burn-in of
    /// `20/rate`, `200/rate` of sampled time per trajectory, 64 trajectories.
    pub fn with_defaults(drift: Drift, g: f64, kerr: f64, gamma: f64, seed: u64) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(Error::InvalidParameter("gamma must be positive".into()));
        }
        let rate = relaxation_rate(drift, g, kerr, gamma)?;
        let dt = match drift {
            Drift::Linear => 1e-3 / gamma,
            _ => {
                let kappa = (gamma - g).abs() / 2.0 + kappa_prefactor_quadrature() * gamma * (kerr / gamma).powf(2.0 / 3.0);
                1e-3 * (gamma / kappa).min(1.0) / gamma
            }
        };
        let burn_in = (20.0 / (rate * dt)).ceil() as usize;
        let run = (200.0 / (rate * dt)).ceil() as usize;
        let sample_every = ((0.05 / rate / dt).round() as usize).clamp(1, 1000);
        Ok(LangevinConfig {
            g,
            kerr,
            dt,
            n_steps: burn_in + run,
            burn_in,
            n_trajectories: 64,
            seed,
            drift,
            sample_every,
            max_lag: 6.0 / rate,
        })
    }

    pub fn validate(&self, gamma: f64) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(gamma > 0.0 && gamma.is_finite()) {
            return bad(format!("gamma must be positive, got {gamma}"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.g >= 0.0 && self.g.is_finite()) || !(self.kerr >= 0.0 && self.kerr.is_finite()) {
            return bad("g and U must be non-negative".into());
        }
        if self.n_trajectories == 0 || self.sample_every == 0 {
            return bad("need at least one trajectory and sample_every >= 1".into());
        }
        if self.n_steps <= self.burn_in {
            return bad(format!(
                "n_steps ({}) must exceed burn_in ({})",
                self.n_steps, self.burn_in
            ));
        }
        let stiff = max_drift_rate(self, gamma)?;
        if self.dt * stiff >= 0.1 {
            return bad(format!(
                "dt = {} too large for drift rate {stiff:.4} (need dt * rate < 0.1)",
                self.dt
            ));
        }
        let rate = relaxation_rate(self.drift, self.g, self.kerr, gamma)?;
        let need = 10.0 / (rate * self.dt);
        if (self.burn_in as f64) < need {
            return bad(format!(
                "burn_in = {} below 10/(rate dt) = {need:.0}",
                self.burn_in
            ));
        }
        Ok(())
    }

    fn samples_per_trajectory(&self) -> usize {
        (self.n_steps - self.burn_in) / self.sample_every
    }
}

/// Slowest relaxation rate expected for the configuration.
pub fn relaxation_rate(drift: Drift, g: f64, kerr: f64, gamma: f64) -> Result<f64> {
    let linear = 0.5 * (gamma - g);
    match drift {
        Drift::Linear => {
            if linear > 0.0 {
                Ok(linear)
            } else {
                Err(Error::NonConfining)
            }
        }
        _ => {
            let x2 = stationary_moment(&FreeEnergy::for_x(g, kerr, gamma), 2)?;
            // initial decay rate of the autocorrelation, T_eff / <x^2>
            Ok((0.5 * gamma / x2).max(linear))
        }
    }
}

fn max_drift_rate(cfg: &LangevinConfig, gamma: f64) -> Result<f64> {
    let lin = 0.5 * (gamma + cfg.g).max((gamma - cfg.g).abs());
    match cfg.drift {
        Drift::Linear => Ok(lin),
        Drift::Quintic | Drift::FullCoupled => {
            let x2 = stationary_moment(&FreeEnergy::for_x(cfg.g, cfg.kerr, gamma), 2)?;
            // stiffness at a 4-sigma excursion
            let x2 = 16.0 * x2;
            let quintic = 5.0 * cfg.kerr.powi(2) * x2 * x2 / (8.0 * (gamma + cfg.g));
            let cubic = if cfg.drift == Drift::FullCoupled {
                0.75 * cfg.kerr * x2
            } else {
                0.0
            };
            Ok(lin + quintic + cubic)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    fn from_batches(batches: &[f64]) -> Self {
        let n = batches.len() as f64;
        let mean = batches.iter().sum::<f64>() / n;
        let var = if batches.len() > 1 {
            batches.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            f64::NAN
        };
        Estimate {
            value: mean,
            stderr: (var / n).sqrt(),
        }
    }

    /// `|value - target| <= k * stderr`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.stderr
    }
}

/// Exponential fit of the autocorrelation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub rate: f64,
    pub stderr: f64,
    /// 95% interval from the spread of per-group fits.
    pub ci: (f64, f64),
    pub window: (f64, f64),
    /// Set when the window had to be shrunk because of non-positive values.
    pub shrunk: bool,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryStats {
    pub mean_x2: Estimate,
    pub mean_p2: Estimate,
    pub mean_x4: Estimate,
    pub n_batches: usize,
    pub n_trajectories: usize,
    pub lags: Vec<f64>,
    /// `<x(t + tau) x(t)>` averaged over trajectories.
    pub autocorr: Vec<f64>,
    /// The same average restricted to disjoint groups of trajectories.
    pub group_autocorr: Vec<Vec<f64>>,
    pub decay: Option<RateFit>,
}

impl TrajectoryStats {
    /// Statistics from pre-sampled `x` series with spacing `sample_dt`.
    ///
    /// Moments use the stored samples; `p` moments are not available and are
    /// reported as NaN.
    pub fn from_samples(series: &[Vec<f64>], sample_dt: f64, max_lag: usize) -> Result<Self> {
        if series.is_empty() || series.iter().any(|s| s.len() < 2) {
            return Err(Error::InvalidData("need non-empty series".into()));
        }
        let per = MIN_BATCHES.div_ceil(series.len()).max(1);
        let mut x2 = Vec::new();
        let mut x4 = Vec::new();
        for s in series {
            let chunk = s.len() / per;
            if chunk == 0 {
                return Err(Error::InvalidData("series too short for batching".into()));
            }
            for b in 0..per {
                let part = &s[b * chunk..(b + 1) * chunk];
                let n = part.len() as f64;
                x2.push(part.iter().map(|x| x * x).sum::<f64>() / n);
                x4.push(part.iter().map(|x| x.powi(4)).sum::<f64>() / n);
            }
        }
        let nan = Estimate {
            value: f64::NAN,
            stderr: f64::NAN,
        };
        let (lags, autocorr, group_autocorr) = pooled_autocorrelation(series, sample_dt, max_lag);
        let mut stats = TrajectoryStats {
            mean_x2: Estimate::from_batches(&x2),
            mean_p2: nan,
            mean_x4: Estimate::from_batches(&x4),
            n_batches: x2.len(),
            n_trajectories: series.len(),
            lags,
            autocorr,
            group_autocorr,
            decay: None,
        };
        stats.decay = autocorrelation_rate(&stats, None).ok();
        Ok(stats)
    }
}

/// Unnormalized autocorrelation sums `sum_i x_i x_{i+k}` for `k <= max_lag`.
fn autocorr_sums(x: &[f64], max_lag: usize, planner: &mut FftPlanner<f64>) -> Vec<f64> {
    let n = x.len();
    let m = (2 * n).next_power_of_two();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    buf.resize(m, Complex::new(0.0, 0.0));
    fwd.process(&mut buf);
    for z in buf.iter_mut() {
        *z = Complex::new(z.norm_sqr(), 0.0);
    }
    inv.process(&mut buf);
    let scale = 1.0 / m as f64;
    (0..=max_lag.min(n - 1)).map(|k| buf[k].re * scale).collect()
}

type Pooled = (Vec<f64>, Vec<f64>, Vec<Vec<f64>>);

fn pooled_autocorrelation(series: &[Vec<f64>], sample_dt: f64, max_lag: usize) -> Pooled {
    let shortest = series.iter().map(Vec::len).min().unwrap_or(1);
    let max_lag = max_lag.min(shortest - 1);
    let mut planner = FftPlanner::new();
    let sums: Vec<Vec<f64>> = series
        .iter()
        .map(|s| autocorr_sums(s, max_lag, &mut planner))
        .collect();
    let average = |idx: &[usize]| -> Vec<f64> {
        (0..=max_lag)
            .map(|k| {
                let num: f64 = idx.iter().map(|&t| sums[t][k]).sum();
                let cnt: usize = idx.iter().map(|&t| series[t].len() - k).sum();
                num / cnt as f64
            })
            .collect()
    };
    let all: Vec<usize> = (0..series.len()).collect();
    let overall = average(&all);
    let groups = RATE_GROUPS.min(series.len());
    let group_autocorr = if groups >= 2 {
        (0..groups)
            .map(|g| {
                let idx: Vec<usize> = (g..series.len()).step_by(groups).collect();
                average(&idx)
            })
            .collect()
    } else {
        Vec::new()
    };
    let lags = (0..=max_lag).map(|k| k as f64 * sample_dt).collect();
    (lags, overall, group_autocorr)
}

struct Trajectory {
    x2: Vec<f64>,
    p2: Vec<f64>,
    x4: Vec<f64>,
    samples: Vec<f64>,
}

/// How each stored step is integrated.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Stepping {
    /// One Euler step of `dt` per normal pair.
    Plain,
    /// One step of `dt` driven by the sum of two normal pairs.
    Coarse,
    /// Two steps of `dt/2`, one per normal pair.
    Fine,
}

fn run_trajectory(cfg: &LangevinConfig, gamma: f64, index: usize, batches: usize) -> Result<Trajectory> {
    run_path(cfg, gamma, index, batches, Stepping::Plain)
}

fn run_path(cfg: &LangevinConfig, gamma: f64, index: usize, batches: usize, mode: Stepping) -> Result<Trajectory> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let noise = (gamma * cfg.dt).sqrt();
    let dt = cfg.dt;
    let kx = 0.5 * (gamma - cfg.g);
    let kp = 0.5 * (gamma + cfg.g);
    let u = cfg.kerr;
    let quint = u * u / (8.0 * (gamma + cfg.g));
    let (mut x, mut p) = (0.0f64, 0.0f64);
    let post = cfg.n_steps - cfg.burn_in;
    let per_batch = post / batches;
    let mut acc = vec![(0.0, 0.0, 0.0); batches];
    let mut samples = Vec::with_capacity(cfg.samples_per_trajectory());
    let drift = |x: f64, p: f64| match cfg.drift {
        Drift::Linear => (-kx * x, -kp * p),
        Drift::Quintic => (-quint * x.powi(5) - kx * x, -kp * p),
        Drift::FullCoupled => {
            let r = 0.25 * u * (x * x + p * p);
            (r * p - kx * x, -r * x - kp * p)
        }
    };
    for step in 0..cfg.n_steps {
        let wx: f64 = StandardNormal.sample(&mut rng);
        let wp: f64 = StandardNormal.sample(&mut rng);
        match mode {
            Stepping::Plain => {
                let (fx, fp) = drift(x, p);
                x += fx * dt + noise * wx;
                p += fp * dt + noise * wp;
            }
            Stepping::Coarse | Stepping::Fine => {
                let vx: f64 = StandardNormal.sample(&mut rng);
                let vp: f64 = StandardNormal.sample(&mut rng);
                if mode == Stepping::Coarse {
                    let (fx, fp) = drift(x, p);
                    x += fx * dt + noise * (wx + vx) * FRAC_1_SQRT_2;
                    p += fp * dt + noise * (wp + vp) * FRAC_1_SQRT_2;
                } else {
                    let half = 0.5 * dt;
                    let hn = noise * FRAC_1_SQRT_2;
                    for (nx, np) in [(wx, wp), (vx, vp)] {
                        let (fx, fp) = drift(x, p);
                        x += fx * half + hn * nx;
                        p += fp * half + hn * np;
                    }
                }
            }
        }
        if !(x.abs() <= DIVERGENCE_GUARD && p.abs() <= DIVERGENCE_GUARD) {
            return Err(Error::Diverged {
                step: step + 1,
                trajectory: Some(index),
                value: x.abs().max(p.abs()),
            });
        }
        if step >= cfg.burn_in {
            let k = step - cfg.burn_in;
            let b = (k / per_batch).min(batches - 1);
            let x2 = x * x;
            acc[b].0 += x2;
            acc[b].1 += p * p;
            acc[b].2 += x2 * x2;
            if (k + 1) % cfg.sample_every == 0 {
                samples.push(x);
            }
        }
    }
    let counts: Vec<f64> = (0..batches)
        .map(|b| {
            if b + 1 == batches {
                (post - per_batch * (batches - 1)) as f64
            } else {
                per_batch as f64
            }
        })
        .collect();
    Ok(Trajectory {
        x2: acc.iter().zip(&counts).map(|(a, c)| a.0 / c).collect(),
        p2: acc.iter().zip(&counts).map(|(a, c)| a.1 / c).collect(),
        x4: acc.iter().zip(&counts).map(|(a, c)| a.2 / c).collect(),
        samples,
    })
}

/// Euler-Maruyama simulation of `n_trajectories` independent trajectories.
///
/// Trajectory `k` draws from the ChaCha8 stream `k` of `seed`, so results do
/// not depend on how the work is scheduled.
pub fn simulate(config: &LangevinConfig, gamma: f64) -> Result<TrajectoryStats> {
    config.validate(gamma)?;
    let batches = MIN_BATCHES.div_ceil(config.n_trajectories);
    if (config.n_steps - config.burn_in) / batches == 0 {
        return Err(Error::InvalidParameter("run too short for batching".into()));
    }
    let cfg = Arc::new(*config);
    let trajs = (0..config.n_trajectories)
        .into_par_iter()
        .map(|k| run_trajectory(&cfg, gamma, k, batches))
        .collect::<Result<Vec<_>>>()?;
    let x2: Vec<f64> = trajs.iter().flat_map(|t| t.x2.iter().copied()).collect();
    let p2: Vec<f64> = trajs.iter().flat_map(|t| t.p2.iter().copied()).collect();
    let x4: Vec<f64> = trajs.iter().flat_map(|t| t.x4.iter().copied()).collect();
    let sample_dt = config.dt * config.sample_every as f64;
    let series: Vec<Vec<f64>> = trajs.into_iter().map(|t| t.samples).collect();
    if series.iter().any(|s| s.len() < 2) {
        return Err(Error::InvalidParameter("too few samples for autocorrelation".into()));
    }
    let max_lag = (config.max_lag / sample_dt).round().max(1.0) as usize;
    let (lags, autocorr, group_autocorr) = pooled_autocorrelation(&series, sample_dt, max_lag);
    let mut stats = TrajectoryStats {
        mean_x2: Estimate::from_batches(&x2),
        mean_p2: Estimate::from_batches(&p2),
        mean_x4: Estimate::from_batches(&x4),
        n_batches: x2.len(),
        n_trajectories: config.n_trajectories,
        lags,
        autocorr,
        group_autocorr,
        decay: None,
    };
    stats.decay = autocorrelation_rate(&stats, None).ok();
    Ok(stats)
}

/// `<x^2>` at `dt` and at `dt/2` on the same Brownian paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DtRefinement {
    pub coarse: Estimate,
    pub fine: Estimate,
    /// Batch-wise `fine - coarse`.
    pub shift: Estimate,
}

/// Weak-convergence audit: rerun every trajectory with half the step,
/// reusing its noise so the two runs differ only by discretization.
pub fn dt_refinement(config: &LangevinConfig, gamma: f64) -> Result<DtRefinement> {
    config.validate(gamma)?;
    let batches = MIN_BATCHES.div_ceil(config.n_trajectories);
    if (config.n_steps - config.burn_in) / batches == 0 {
        return Err(Error::InvalidParameter("run too short for batching".into()));
    }
    let pairs = (0..config.n_trajectories)
        .into_par_iter()
        .map(|k| {
            let c = run_path(config, gamma, k, batches, Stepping::Coarse)?;
            let f = run_path(config, gamma, k, batches, Stepping::Fine)?;
            Ok((c.x2, f.x2))
        })
        .collect::<Result<Vec<_>>>()?;
    let coarse: Vec<f64> = pairs.iter().flat_map(|p| p.0.iter().copied()).collect();
    let fine: Vec<f64> = pairs.iter().flat_map(|p| p.1.iter().copied()).collect();
    let diff: Vec<f64> = coarse.iter().zip(&fine).map(|(c, f)| f - c).collect();
    Ok(DtRefinement {
        coarse: Estimate::from_batches(&coarse),
        fine: Estimate::from_batches(&fine),
        shift: Estimate::from_batches(&diff),
    })
}

struct WindowFit {
    rate: f64,
    points: usize,
    shrunk: bool,
    window: (f64, f64),
}

fn fit_window(lags: &[f64], c: &[f64], window: (f64, f64)) -> Option<WindowFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut shrunk = false;
    let mut hi = window.1;
    for (&t, &v) in lags.iter().zip(c) {
        if t < window.0 {
            continue;
        }
        if t > window.1 {
            break;
        }
        if !(v > 0.0) {
            shrunk = true;
            break;
        }
        xs.push(t);
        ys.push(v.ln());
        hi = t;
    }
    if xs.len() < 3 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let rate = -sxy / sxx;
    Some(WindowFit {
        rate,
        points: xs.len(),
        shrunk,
        window: (window.0, if shrunk { hi } else { window.1 }),
    })
}

/// First lag where `C` falls below `C(0)/e`, inverted into a rate.
fn crude_rate(lags: &[f64], c: &[f64]) -> Option<f64> {
    let c0 = *c.first()?;
    if !(c0 > 0.0) {
        return None;
    }
    let target = c0 / std::f64::consts::E;
    for k in 1..c.len() {
        if c[k] < target {
            // linear interpolation between k-1 and k
            let f = (c[k - 1] - target) / (c[k - 1] - c[k]);
            let t = lags[k - 1] + f * (lags[k] - lags[k - 1]);
            return (t > 0.0).then(|| 1.0 / t);
        }
    }
    None
}

/// Least-squares decay rate of `ln C(tau)`.
///
/// Without an explicit window the fit uses `[0.5, 3] / rate`, starting from
/// the `1/e` time and iterated once with the fitted rate.
pub fn autocorrelation_rate(stats: &TrajectoryStats, window: Option<(f64, f64)>) -> Result<RateFit> {
    let lags = &stats.lags;
    let c = &stats.autocorr;
    let no_fit = |m: &str| Error::NoExponentialFit(m.to_string());
    let window = match window {
        Some(w) => w,
        None => {
            let r0 = crude_rate(lags, c).ok_or_else(|| no_fit("autocorrelation never decays below 1/e"))?;
            let first = fit_window_default(lags, c, r0).ok_or_else(|| no_fit("too few positive points"))?;
            if !(first.rate > 0.0) {
                return Err(no_fit("non-decaying autocorrelation"));
            }
            (0.5 / first.rate, 3.0 / first.rate)
        }
    };
    let fit = fit_window(lags, c, window).ok_or_else(|| no_fit("too few positive points in window"))?;
    if !(fit.rate > 0.0) || !fit.rate.is_finite() {
        return Err(no_fit("non-decaying autocorrelation"));
    }
    // a fit that needed the window cut to fewer than a handful of lags is noise
    let span = lags.get(1).copied().unwrap_or(0.0);
    if fit.shrunk && (fit.window.1 - fit.window.0) < 0.25 * (window.1 - window.0).max(span) {
        return Err(no_fit("autocorrelation is not positive over the fit window"));
    }
    let group_rates: Vec<f64> = stats
        .group_autocorr
        .iter()
        .filter_map(|g| fit_window(lags, g, fit.window).map(|f| f.rate))
        .collect();
    let stderr = if group_rates.len() >= 2 {
        let n = group_rates.len() as f64;
        let m = group_rates.iter().sum::<f64>() / n;
        let v = group_rates.iter().map(|r| (r - m).powi(2)).sum::<f64>() / (n - 1.0);
        (v / n).sqrt()
    } else {
        f64::NAN
    };
    Ok(RateFit {
        rate: fit.rate,
        stderr,
        ci: (fit.rate - 1.96 * stderr, fit.rate + 1.96 * stderr),
        window: fit.window,
        shrunk: fit.shrunk,
        points: fit.points,
    })
}

fn fit_window_default(lags: &[f64], c: &[f64], rate: f64) -> Option<WindowFit> {
    fit_window(lags, c, (0.5 / rate, 3.0 / rate))
}

/// `F(x) = quadratic x^2 + sextic x^6` at temperature `t_eff`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreeEnergy {
    pub quadratic: f64,
    pub sextic: f64,
    pub t_eff: f64,
}

impl FreeEnergy {
    /// Slow quadrature: `(gamma - g)/4 x^2 + U^2/(48(gamma + g)) x^6`.
    pub fn for_x(g: f64, kerr: f64, gamma: f64) -> Self {
        FreeEnergy {
            quadratic: 0.25 * (gamma - g),
            sextic: kerr * kerr / (48.0 * (gamma + g)),
            t_eff: 0.5 * gamma,
        }
    }

    /// Squeezed quadrature: `(gamma + g)/4 p^2`.
    pub fn for_p(g: f64, gamma: f64) -> Self {
        FreeEnergy {
            quadratic: 0.25 * (gamma + g),
            sextic: 0.0,
            t_eff: 0.5 * gamma,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        let x2 = x * x;
        self.quadratic * x2 + self.sextic * x2 * x2 * x2
    }

    pub fn is_confining(&self) -> bool {
        self.t_eff > 0.0 && (self.sextic > 0.0 || (self.sextic == 0.0 && self.quadratic > 0.0))
    }
}

/// `<x^power>` under `exp(-F/T_eff)` by adaptive quadrature.
pub fn stationary_moment(f: &FreeEnergy, power: u32) -> Result<f64> {
    if power % 2 == 1 {
        return Err(Error::InvalidParameter(format!("power must be even, got {power}")));
    }
    if !f.is_confining() {
        return Err(Error::NonConfining);
    }
    if power == 0 {
        return Ok(1.0);
    }
    // shift by the minimum of F so the weight never overflows
    let fmin = if f.quadratic < 0.0 && f.sextic > 0.0 {
        let xm2 = (-f.quadratic / (3.0 * f.sextic)).sqrt();
        f.value(xm2.sqrt())
    } else {
        0.0
    };
    let mut l = 1.0;
    while (f.value(l) - fmin) / f.t_eff <= 50.0 {
        l *= 2.0;
        if l > 1e12 {
            return Err(Error::NonConfining);
        }
    }
    let w = |x: f64| (-(f.value(x) - fmin) / f.t_eff).exp();
    let pw = power as i32;
    let norm = quad::integrate(w, 0.0, l, &[], 1e-300, 1e-12)?;
    let mom = quad::integrate(|x| x.powi(pw) * w(x), 0.0, l, &[], 1e-300, 1e-12)?;
    Ok(mom.value / norm.value)
}

/// `(<x^2> + <p^2> - 2) / 4`.
pub fn occupation_from_moments(x2: f64, p2: f64) -> Result<f64> {
    if !(x2 > 0.0 && p2 > 0.0) {
        return Err(Error::InvalidParameter("moments must be positive".into()));
    }
    Ok((x2 + p2 - 2.0) / 4.0)
}

/// Wick estimate of the critical decay rate `15 U^2 <x^2>^2 / (16 gamma)`.
pub fn predicted_kappa(kerr: f64, gamma: f64, x2: f64) -> Result<f64> {
    if !(kerr > 0.0) || !(gamma > 0.0) {
        return Err(Error::InvalidParameter("need U > 0 and gamma > 0".into()));
    }
    Ok(15.0 * kerr * kerr * x2 * x2 / (16.0 * gamma))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Exponents {
    pub nu_n: f64,
    pub nu_t: f64,
    pub eta_n: f64,
    pub eta_t: f64,
}

/// `(nu_n, nu_t, eta_n, eta_t) = (1, 1, 2/3, 2/3)`.
pub fn predicted_exponents() -> Exponents {
    Exponents {
        nu_n: 1.0,
        nu_t: 1.0,
        eta_n: 2.0 / 3.0,
        eta_t: 2.0 / 3.0,
    }
}
