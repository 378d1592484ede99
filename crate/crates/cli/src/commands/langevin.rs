use anyhow::{Context, Result};
use clap::Args;
use kerrdpt::langevin::*;
use kerrdpt::scaling::{exponent_relation, fit_power_law, ScalingFit};
use serde_json::{json, Value};

use super::Outcome;
use crate::output::{Cell, RunDir};
use crate::{Common, DriftArg};

#[derive(Args, Debug, Clone)]
pub struct LangevinArgs {
    #[command(flatten)]
    pub common: Common,

    /// Real drive `g` (the drive is `G = i g`).
    #[arg(long = "G", default_value_t = 0.9)]
    pub g: f64,

    #[arg(long = "U", default_value_t = 0.0)]
    pub kerr: f64,

    #[arg(long, value_enum, default_value_t = DriftArg::Linear)]
    pub drift: DriftArg,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Time step (default: sized from the relaxation rate).
    #[arg(long)]
    pub dt: Option<f64>,

    /// Total steps per trajectory, burn-in included.
    #[arg(long)]
    pub steps: Option<usize>,

    #[arg(long = "burn-in")]
    pub burn_in: Option<usize>,

    #[arg(long)]
    pub trajectories: Option<usize>,

    /// Linear-drift drives for the `nu_n`, `nu_t` fits, comma separated.
    #[arg(long = "scan-G", value_delimiter = ',')]
    pub scan_g: Vec<f64>,

    /// Kerr strengths at `g = gamma` (quintic drift) for the `eta_n`, `eta_t` fits.
    #[arg(long = "scan-U", value_delimiter = ',')]
    pub scan_u: Vec<f64>,

    /// Tolerance of the exponent relation check.
    #[arg(long = "relation-tol", default_value_t = 0.1)]
    pub relation_tol: f64,
}

fn drift(d: DriftArg) -> Drift {
    match d {
        DriftArg::Linear => Drift::Linear,
        DriftArg::Quintic => Drift::Quintic,
        DriftArg::Full => Drift::FullCoupled,
    }
}

impl LangevinArgs {
    fn config(&self, drift: Drift, g: f64, kerr: f64, seed: u64, gamma: f64) -> kerrdpt::Result<LangevinConfig> {
        let mut c = LangevinConfig::with_defaults(drift, g, kerr, gamma, seed)?;
        if let Some(dt) = self.dt {
            c.dt = dt;
        }
        if let Some(b) = self.burn_in {
            c.burn_in = b;
        }
        if let Some(s) = self.steps {
            c.n_steps = s;
        }
        if let Some(t) = self.trajectories {
            c.n_trajectories = t;
        }
        c.validate(gamma)?;
        Ok(c)
    }
}

struct Run {
    role: &'static str,
    config: LangevinConfig,
    stats: TrajectoryStats,
}

fn simulate_labelled(role: &'static str, config: LangevinConfig, gamma: f64) -> Result<Run> {
    let stats = simulate(&config, gamma)
        .with_context(|| format!("{role} run (drift {}, g = {}, U = {})", config.drift, config.g, config.kerr))?;
    Ok(Run { role, config, stats })
}

fn rate(stats: &TrajectoryStats) -> f64 {
    stats.decay.as_ref().map_or(f64::NAN, |d| d.rate)
}

/// Fitted exponent with its source, or the prediction when no scan was run.
fn exponent_entry(fit: Option<kerrdpt::Result<ScalingFit>>, sign: f64, predicted: f64) -> (f64, Value) {
    match fit {
        Some(Ok(f)) => (sign * f.exponent, json!({"value": sign * f.exponent, "source": "fit", "fit": f})),
        Some(Err(e)) => (predicted, json!({"value": predicted, "source": "predicted", "fit_error": e.to_string()})),
        None => (predicted, json!({"value": predicted, "source": "predicted"})),
    }
}

fn scan_fit(xs: &[f64], runs: &[Run], y: impl Fn(&TrajectoryStats) -> f64) -> Option<kerrdpt::Result<ScalingFit>> {
    if runs.is_empty() {
        return None;
    }
    let ys: Vec<f64> = runs.iter().map(|r| y(&r.stats)).collect();
    Some(fit_power_law(xs, &ys))
}

pub fn run(args: &LangevinArgs, common: &Common) -> Result<Outcome> {
    let gamma = common.gamma;
    let main_drift = drift(args.drift);
    let main = simulate_labelled("main", args.config(main_drift, args.g, args.kerr, args.seed, gamma)?, gamma)?;
    let mut seeds = vec![args.seed];
    let mut scan_g = Vec::new();
    for (k, &g) in args.scan_g.iter().enumerate() {
        let seed = args.seed.wrapping_add(1 + k as u64);
        seeds.push(seed);
        scan_g.push(simulate_labelled("scan_G", args.config(Drift::Linear, g, 0.0, seed, gamma)?, gamma)?);
    }
    let mut scan_u = Vec::new();
    for (k, &u) in args.scan_u.iter().enumerate() {
        let seed = args.seed.wrapping_add(1 + (args.scan_g.len() + k) as u64);
        seeds.push(seed);
        scan_u.push(simulate_labelled("scan_U", args.config(Drift::Quintic, gamma, u, seed, gamma)?, gamma)?);
    }

    let header: Vec<String> = [
        "role", "drift", "g", "U", "mean_x2", "mean_x2_stderr", "mean_p2", "mean_p2_stderr", "mean_x4",
        "mean_x4_stderr", "rate", "rate_stderr", "n_batches", "n_trajectories",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let rows: Vec<Vec<Cell>> = std::iter::once(&main)
        .chain(&scan_g)
        .chain(&scan_u)
        .map(|r| {
            let s = &r.stats;
            vec![
                r.role.into(),
                r.config.drift.to_string().into(),
                r.config.g.into(),
                r.config.kerr.into(),
                s.mean_x2.value.into(),
                s.mean_x2.stderr.into(),
                s.mean_p2.value.into(),
                s.mean_p2.stderr.into(),
                s.mean_x4.value.into(),
                s.mean_x4.stderr.into(),
                rate(s).into(),
                s.decay.as_ref().map_or(f64::NAN, |d| d.stderr).into(),
                s.n_batches.into(),
                s.n_trajectories.into(),
            ]
        })
        .collect();
    let autocorr: Vec<Vec<Cell>> = main
        .stats
        .lags
        .iter()
        .zip(&main.stats.autocorr)
        .map(|(&t, &c)| vec![t.into(), c.into()])
        .collect();

    let x2_quadrature = match main_drift {
        Drift::Linear => stationary_moment(&FreeEnergy::for_x(args.g, 0.0, gamma), 2).ok(),
        Drift::Quintic => stationary_moment(&FreeEnergy::for_x(args.g, args.kerr, gamma), 2).ok(),
        Drift::FullCoupled => None,
    };
    let kappa = if main_drift != Drift::Linear && args.kerr > 0.0 {
        let scale = (gamma / args.kerr).powf(2.0 / 3.0);
        let measured = rate(&main.stats);
        let from_x2 = predicted_kappa(args.kerr, gamma, main.stats.mean_x2.value)?;
        json!({
            "measured": measured,
            "predicted_from_measured_x2": from_x2,
            "predicted_quadrature_prefactor": predicted_kappa(args.kerr, gamma, x2_prefactor_quadrature() * scale)?,
            "predicted_printed_prefactor": predicted_kappa(args.kerr, gamma, x2_prefactor_printed() * scale)?,
            "relative_deviation": (measured - from_x2).abs() / from_x2,
        })
    } else {
        Value::Null
    };

    let predicted = predicted_exponents();
    let eps: Vec<f64> = args.scan_g.iter().map(|g| gamma - g).collect();
    let (nu_n, nu_n_json) = exponent_entry(scan_fit(&eps, &scan_g, |s| s.mean_x2.value), -1.0, predicted.nu_n);
    let (nu_t, nu_t_json) = exponent_entry(scan_fit(&eps, &scan_g, rate), 1.0, predicted.nu_t);
    let (eta_n, eta_n_json) = exponent_entry(scan_fit(&args.scan_u, &scan_u, |s| s.mean_x2.value), -1.0, predicted.eta_n);
    let (eta_t, eta_t_json) = exponent_entry(scan_fit(&args.scan_u, &scan_u, rate), 1.0, predicted.eta_t);
    let relation = exponent_relation(nu_n, nu_t, eta_n, eta_t, args.relation_tol);

    let report = json!({
        "command": "langevin",
        "config": main.config,
        "gamma": gamma,
        "stats": {
            "mean_x2": main.stats.mean_x2,
            "mean_p2": main.stats.mean_p2,
            "mean_x4": main.stats.mean_x4,
            "n_batches": main.stats.n_batches,
            "n_trajectories": main.stats.n_trajectories,
            "decay": main.stats.decay,
        },
        "occupation": occupation_from_moments(main.stats.mean_x2.value, main.stats.mean_p2.value).ok(),
        "x2_quadrature": x2_quadrature,
        "x2_ratio": x2_quadrature.map(|q| main.stats.mean_x2.value / q),
        "kappa": kappa,
        "exponents": {"nu_n": nu_n_json, "nu_t": nu_t_json, "eta_n": eta_n_json, "eta_t": eta_t_json},
        "relation_check": {"holds": relation.holds, "residual": relation.residual, "tol": args.relation_tol},
    });
    let params = json!({
        "G": args.g,
        "U": args.kerr,
        "gamma": gamma,
        "drift": main_drift.to_string(),
        "seed": args.seed,
        "config": main.config,
        "scan_G": args.scan_g,
        "scan_U": args.scan_u,
        "dt": args.dt,
        "steps": args.steps,
        "burn_in": args.burn_in,
        "trajectories": args.trajectories,
        "relation_tol": args.relation_tol,
    });
    let mut dir = RunDir::create(&common.out, "langevin", params)?;
    dir.write_csv("data.csv", "kerrdpt.langevin.v1", &header, &rows)?;
    dir.write_csv("autocorr.csv", "kerrdpt.langevin-autocorr.v1", &["lag".into(), "autocorr".into()], &autocorr)?;
    dir.write_json("report.json", &report)?;
    Ok(Outcome {
        dir,
        seeds,
        flagged: false,
    })
}
