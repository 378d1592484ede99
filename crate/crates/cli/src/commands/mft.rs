use anyhow::{bail, Result};
use clap::Args;
use kerrdpt::liouville::{build_hamiltonian, build_liouvillian_capped, observable_n, steady_state, tail_weight, UNRELIABLE_TAIL};
use kerrdpt::meanfield::steady_order_parameter;
use kerrdpt::{FrequencyGrid, ModelParams};
use rayon::prelude::*;
use serde_json::json;

use super::{check_inv_u, cutoff, Outcome};
use crate::output::{Cell, RunDir};
use crate::Common;

#[derive(Args, Debug, Clone)]
pub struct MftArgs {
    #[command(flatten)]
    pub common: Common,

    #[arg(long = "G-min", default_value_t = 0.0)]
    pub g_min: f64,

    #[arg(long = "G-max", default_value_t = 2.0)]
    pub g_max: f64,

    #[arg(long = "G-points", default_value_t = 41)]
    pub g_points: usize,

    /// Kerr strengths as `1/U`, comma separated; one ED column each.
    #[arg(long = "inv-U-list", value_delimiter = ',', default_values_t = vec![10.0, 20.0, 40.0])]
    pub inv_u_list: Vec<f64>,

    /// Fixed Fock cutoff, overriding the occupation-based rule.
    #[arg(long)]
    pub nmax: Option<usize>,
}

struct EdPoint {
    un: f64,
    n_max: usize,
    clamped: bool,
    tail: f64,
}

fn ed_point(g: f64, gamma: f64, inv_u: f64, nmax: Option<usize>) -> kerrdpt::Result<EdPoint> {
    let params = ModelParams::resonant(g, 1.0 / inv_u, gamma)?;
    let (n_max, clamped, cap) = cutoff(&params, nmax);
    let l = build_liouvillian_capped(&params, n_max, cap)?;
    let rho = steady_state(&l)?;
    let ops = build_hamiltonian(&params, n_max)?;
    Ok(EdPoint {
        un: observable_n(&rho, &ops) / inv_u,
        n_max,
        clamped,
        tail: tail_weight(&rho),
    })
}

pub fn run(args: &MftArgs, common: &Common) -> Result<Outcome> {
    check_inv_u(&args.inv_u_list)?;
    if args.g_min < 0.0 {
        bail!(kerrdpt::Error::InvalidParameter("--G-min must be non-negative".into()));
    }
    let drives = FrequencyGrid::new(args.g_min, args.g_max, args.g_points)?.points();
    let gamma = common.gamma;
    let params = json!({
        "gamma": gamma,
        "G_min": args.g_min,
        "G_max": args.g_max,
        "G_points": args.g_points,
        "inv_U_list": args.inv_u_list,
        "nmax": args.nmax,
    });
    let tasks: Vec<(usize, usize)> = (0..drives.len())
        .flat_map(|i| (0..args.inv_u_list.len()).map(move |j| (i, j)))
        .collect();
    let points: Vec<EdPoint> = tasks
        .par_iter()
        .map(|&(i, j)| ed_point(drives[i], gamma, args.inv_u_list[j], args.nmax))
        .collect::<kerrdpt::Result<_>>()?;

    let mut header = vec!["G".to_string(), "phi_mf".to_string()];
    header.extend(args.inv_u_list.iter().map(|v| format!("Un_ed_invU_{v}")));
    header.push("warnings".to_string());
    let width = args.inv_u_list.len();
    let mut rows = Vec::with_capacity(drives.len());
    let mut flags = Vec::new();
    let mut flagged = false;
    for (i, &g) in drives.iter().enumerate() {
        let phi = steady_order_parameter(&ModelParams::resonant(g, 1.0 / args.inv_u_list[0], gamma)?)?;
        let mut row: Vec<Cell> = vec![g.into(), phi.into()];
        let mut warnings = Vec::new();
        for (j, p) in points[i * width..(i + 1) * width].iter().enumerate() {
            row.push(p.un.into());
            let unreliable = p.tail >= UNRELIABLE_TAIL;
            flagged |= unreliable;
            if p.clamped || unreliable {
                let inv_u = args.inv_u_list[j];
                let mut what = Vec::new();
                if p.clamped {
                    what.push("clamped");
                }
                if unreliable {
                    what.push("tail");
                }
                warnings.push(format!("invU={inv_u}:{}", what.join("+")));
                flags.push(json!({
                    "G": g,
                    "inv_U": inv_u,
                    "n_max": p.n_max,
                    "clamped": p.clamped,
                    "tail_weight": p.tail,
                    "unreliable": unreliable,
                }));
            }
        }
        row.push(warnings.join(";").into());
        rows.push(row);
    }

    let mut dir = RunDir::create(&common.out, "mft-sweep", params)?;
    dir.write_csv("data.csv", "kerrdpt.mft-sweep.v1", &header, &rows)?;
    let n_max_used: Vec<usize> = points.iter().map(|p| p.n_max).collect();
    dir.write_json(
        "report.json",
        &json!({
            "command": "mft-sweep",
            "points": drives.len() * width,
            "max_n_max": n_max_used.iter().max(),
            "flagged": flags,
            "unreliable": flagged,
        }),
    )?;
    Ok(Outcome {
        dir,
        seeds: Vec::new(),
        flagged,
    })
}
