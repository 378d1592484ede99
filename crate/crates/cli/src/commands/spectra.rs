use anyhow::Result;
use clap::Args;
use kerrdpt::keldysh::*;
use kerrdpt::meanfield::steady_order_parameter;
use kerrdpt::{FrequencyGrid, ModelParams, Regime};
use serde_json::{json, Value};

use super::Outcome;
use crate::output::{Cell, RunDir};
use crate::Common;

#[derive(Args, Debug, Clone)]
pub struct SpectraArgs {
    #[command(flatten)]
    pub common: Common,

    /// Drive strength |G|.
    #[arg(long = "G", default_value_t = 0.8)]
    pub g: f64,

    /// Kerr strength; only the elastic weight depends on it.
    #[arg(long = "U", default_value_t = 0.05)]
    pub kerr: f64,

    #[arg(long = "omega-min", default_value_t = -5.0)]
    pub omega_min: f64,

    #[arg(long = "omega-max", default_value_t = 5.0)]
    pub omega_max: f64,

    #[arg(long = "omega-points", default_value_t = 1001)]
    pub omega_points: usize,
}

fn optional(r: kerrdpt::Result<f64>) -> Value {
    r.map_or(Value::Null, |v| json!(v))
}

pub fn run(args: &SpectraArgs, common: &Common) -> Result<Outcome> {
    let gamma = common.gamma;
    let p = ModelParams::resonant(args.g, args.kerr, gamma)?;
    let grid = FrequencyGrid::new(args.omega_min, args.omega_max, args.omega_points)?;
    let regime = p.regime();
    let critical = regime == Regime::Critical;
    let (a, s, h) = if critical {
        (
            critical_spectral_function(gamma, &grid)?,
            critical_power_spectrum(gamma, &grid)?,
            critical_effective_distribution(gamma, &grid)?,
        )
    } else {
        (
            spectral_function(&p, &grid)?,
            power_spectrum_inel(&p, &grid)?,
            effective_distribution(&p, &grid)?,
        )
    };
    let header: Vec<String> = ["omega", "A", "S_inel", "h_tilde"].iter().map(|s| s.to_string()).collect();
    let rows: Vec<Vec<Cell>> = (0..a.omegas.len())
        .map(|i| vec![a.omegas[i].into(), a.values[i].into(), s.values[i].into(), h.values[i].into()])
        .collect();

    let phi = steady_order_parameter(&p)?;
    let (fwhm_value, inelastic_max) = if critical {
        (Value::Null, Value::Null)
    } else {
        (optional(fwhm(&p)), optional(inelastic_peak(&p)))
    };
    let report = json!({
        "command": "spectra",
        "regime": format!("{regime:?}").to_lowercase(),
        "critical_forms": critical,
        "G": args.g,
        "U": args.kerr,
        "gamma": gamma,
        "phi_mf": phi,
        "delta": {"A": a.delta, "S_inel": s.delta},
        "fwhm": fwhm_value,
        "peak_location": optional(peak_location(&p)),
        "inelastic_peak": inelastic_max,
        "two_peak_onset": two_peak_onset(gamma),
        "elastic_weight": elastic_weight(&p)?,
        "sum_rule": optional(spectral_sum_rule(&p)),
        "masked": {"S_inel": s.masked, "h_tilde": h.masked},
        "max_asymmetry": {"A": a.max_asymmetry(), "S_inel": s.max_asymmetry()},
    });
    let params = json!({
        "G": args.g,
        "U": args.kerr,
        "gamma": gamma,
        "omega_min": args.omega_min,
        "omega_max": args.omega_max,
        "omega_points": args.omega_points,
    });
    let mut dir = RunDir::create(&common.out, "spectra", params)?;
    dir.write_csv("data.csv", "kerrdpt.spectra.v1", &header, &rows)?;
    dir.write_json("report.json", &report)?;
    Ok(Outcome {
        dir,
        seeds: Vec::new(),
        flagged: false,
    })
}
