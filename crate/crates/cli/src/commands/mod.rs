//! Subcommand implementations.

pub mod ed;
pub mod langevin;
pub mod mft;
pub mod spectra;

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Result};
use kerrdpt::liouville::{CutoffRule, NmaxRule};
use kerrdpt::ModelParams;

use crate::output::RunDir;
use crate::{Common, EXIT_UNRELIABLE};

/// A finished command: its run directory, the seeds it used and whether any
/// result was flagged as unreliable.
pub struct Outcome {
    pub dir: RunDir,
    pub seeds: Vec<u64>,
    pub flagged: bool,
}

/// Run `body` on a worker pool sized from `--workers` and write the manifest.
pub fn run(common: &Common, body: impl FnOnce(&Common) -> Result<Outcome> + Send) -> Result<(PathBuf, u8)> {
    if !(common.gamma > 0.0 && common.gamma.is_finite()) {
        bail!(kerrdpt::Error::InvalidParameter(format!("gamma must be positive, got {}", common.gamma)));
    }
    let workers = match common.workers {
        Some(0) => bail!(kerrdpt::Error::InvalidParameter("--workers must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    let started = Instant::now();
    let outcome = pool.install(|| body(common))?;
    let code = if outcome.flagged { EXIT_UNRELIABLE } else { 0 };
    let dir = outcome.dir.finish(&outcome.seeds, code, started)?;
    Ok((dir, code))
}

/// The cutoff for one point: `--nmax` if given, else the occupation-based rule.
pub fn cutoff(params: &ModelParams, nmax: Option<usize>) -> (usize, bool, usize) {
    match nmax {
        Some(n) => (n, false, usize::MAX),
        None => {
            let rule = CutoffRule::default();
            let (n, clamped) = rule.n_max(params);
            (n, clamped, rule.dim_cap)
        }
    }
}

pub fn nmax_rule(nmax: Option<usize>) -> NmaxRule {
    nmax.map_or_else(NmaxRule::default, NmaxRule::Fixed)
}

/// Reject empty or non-positive `1/U` lists before any work starts.
pub fn check_inv_u(list: &[f64]) -> Result<()> {
    if list.is_empty() {
        bail!(kerrdpt::Error::InvalidParameter("--inv-U-list is empty".into()));
    }
    if let Some(bad) = list.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        bail!(kerrdpt::Error::InvalidParameter(format!("1/U must be positive, got {bad}")));
    }
    Ok(())
}
