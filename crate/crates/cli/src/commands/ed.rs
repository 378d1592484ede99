use anyhow::Result;
use clap::Args;
use kerrdpt::liouville::*;
use kerrdpt::scaling::{fit_exponential, fit_linear, fit_power_law};
use kerrdpt::ModelParams;
use serde_json::{json, Value};

use super::{check_inv_u, cutoff, nmax_rule, Outcome};
use crate::output::{Cell, RunDir};
use crate::Common;

#[derive(Args, Debug, Clone)]
pub struct EdArgs {
    #[command(flatten)]
    pub common: Common,

    /// Drive strength |G|.
    #[arg(long = "G", default_value_t = 1.0)]
    pub g: f64,

    /// Kerr strengths as `1/U`, comma separated.
    #[arg(long = "inv-U-list", value_delimiter = ',', default_values_t = vec![20.0, 30.0, 40.0, 50.0, 60.0, 80.0])]
    pub inv_u_list: Vec<f64>,

    /// Fixed Fock cutoff, overriding the occupation-based rule.
    #[arg(long)]
    pub nmax: Option<usize>,

    /// `1/U` of the Wigner maps (default: the largest in the list).
    #[arg(long = "wigner-inv-U")]
    pub wigner_inv_u: Option<f64>,

    /// Points per phase-space axis.
    #[arg(long = "wigner-points", default_value_t = 201)]
    pub wigner_points: usize,
}

fn fit_value<T: serde::Serialize>(r: kerrdpt::Result<T>) -> Value {
    match r {
        Ok(fit) => serde_json::to_value(fit).unwrap_or(Value::Null),
        Err(e) => json!({"error": e.to_string()}),
    }
}

fn wigner_rows(w: &WignerGrid) -> (Vec<String>, Vec<Vec<Cell>>) {
    let mut header = vec!["p\\x".to_string()];
    header.extend(w.xs.iter().map(|x| format!("{x:.16e}")));
    let rows = w
        .ps
        .iter()
        .enumerate()
        .map(|(ip, &p)| {
            let mut row: Vec<Cell> = vec![p.into()];
            row.extend(w.values.row(ip).iter().map(|&v| Cell::from(v)));
            row
        })
        .collect();
    (header, rows)
}

pub fn run(args: &EdArgs, common: &Common) -> Result<Outcome> {
    check_inv_u(&args.inv_u_list)?;
    let gamma = common.gamma;
    let rows = finite_size_sweep(args.g, gamma, &args.inv_u_list, nmax_rule(args.nmax))?;

    let mut header: Vec<String> = [
        "inv_U", "U", "n_max", "clamped", "occupation", "phi_ed", "phi_mf", "phi_deviation", "gap", "tail_weight",
        "unreliable",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for k in 0..REPORTED_EIGENVALUES {
        header.push(format!("lambda{k}_re"));
        header.push(format!("lambda{k}_im"));
    }
    let table: Vec<Vec<Cell>> = rows
        .iter()
        .map(|r| {
            let mut row: Vec<Cell> = vec![
                r.inv_u.into(),
                r.kerr.into(),
                r.n_max.into(),
                r.clamped.into(),
                r.occupation.into(),
                r.phi_ed.into(),
                r.phi_mf.into(),
                r.phi_deviation.into(),
                r.gap.into(),
                r.tail_weight.into(),
                r.unreliable.into(),
            ];
            for k in 0..REPORTED_EIGENVALUES {
                row.push(r.leading_re.get(k).copied().unwrap_or(f64::NAN).into());
                row.push(r.leading_im.get(k).copied().unwrap_or(f64::NAN).into());
            }
            row
        })
        .collect();

    let us: Vec<f64> = rows.iter().map(|r| r.kerr).collect();
    let inv: Vec<f64> = rows.iter().map(|r| r.inv_u).collect();
    let gaps: Vec<f64> = rows.iter().map(|r| r.gap).collect();
    let lambda1: Vec<f64> = rows.iter().map(|r| r.leading_re.get(1).map_or(f64::NAN, |v| v.abs())).collect();
    let devs: Vec<f64> = rows.iter().map(|r| r.phi_deviation).collect();
    let occ: Vec<f64> = rows.iter().map(|r| r.occupation).collect();
    let scaled: Vec<f64> = us.iter().map(|u| u.powf(-2.0 / 3.0)).collect();
    let gap_fit = fit_power_law(&us, &gaps);
    let gap_exponent = gap_fit.as_ref().map_or(Value::Null, |f| json!(f.exponent));

    let wigner_inv_u = args
        .wigner_inv_u
        .unwrap_or_else(|| args.inv_u_list.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    check_inv_u(&[wigner_inv_u])?;
    let wp = ModelParams::resonant(args.g, 1.0 / wigner_inv_u, gamma)?;
    let (n_max, clamped, cap) = cutoff(&wp, args.nmax);
    let spec = diagonalize(&build_liouvillian_capped(&wp, n_max, cap)?, 2)?;
    let pair = steady_pair(&spec)?;
    let default_grid = PhaseGrid::default_for(n_max);
    let grid = PhaseGrid::symmetric(default_grid.x_max, args.wigner_points)?;
    let w0 = wigner(&pair.sigma0, &grid)?;
    let w1 = wigner(&pair.sigma1, &grid)?;

    let flagged_rows: Vec<f64> = rows.iter().filter(|r| r.unreliable).map(|r| r.inv_u).collect();
    let flagged = !flagged_rows.is_empty() || w0.tail_warning;
    let report = json!({
        "command": "ed-report",
        "G": args.g,
        "gamma": gamma,
        "gap_fit": fit_value(gap_fit),
        "gap_exponent": gap_exponent,
        "lambda1_fit": fit_value(fit_exponential(&inv, &lambda1)),
        "phi_deviation_fit": fit_value(fit_power_law(&us, &devs)),
        "occupation_fit": fit_value(fit_power_law(&us, &occ)),
        "occupation_vs_U_minus_two_thirds": fit_value(fit_linear(&scaled, &occ)),
        "wigner": {
            "inv_U": wigner_inv_u,
            "n_max": n_max,
            "clamped": clamped,
            "lambda1": [pair.lambda1.re, pair.lambda1.im],
            "sigma0_inversion_residual": w0.inversion_residual(1.0),
            "sigma1_inversion_residual": w1.inversion_residual(-1.0),
            "sigma0_integral": w0.integral(),
            "sigma1_integral": w1.integral(),
            "tail_weight": w0.tail_weight,
            "tail_warning": w0.tail_warning,
            "negativity": pair.negativity,
        },
        "unreliable_inv_U": flagged_rows,
        "unreliable": flagged,
    });
    let params = json!({
        "G": args.g,
        "gamma": gamma,
        "inv_U_list": args.inv_u_list,
        "nmax": args.nmax,
        "wigner_inv_U": wigner_inv_u,
        "wigner_points": args.wigner_points,
    });
    let mut dir = RunDir::create(&common.out, "ed-report", params)?;
    dir.write_csv("data.csv", "kerrdpt.ed-report.v1", &header, &table)?;
    for (name, w) in [("wigner_sigma0.csv", &w0), ("wigner_sigma1.csv", &w1)] {
        let (h, r) = wigner_rows(w);
        dir.write_csv(name, "kerrdpt.wigner.v1", &h, &r)?;
    }
    dir.write_json("report.json", &report)?;
    Ok(Outcome {
        dir,
        seeds: Vec::new(),
        flagged,
    })
}
