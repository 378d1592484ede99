//! `kerrdpt`: figure-data pipelines for the Kerr parametric oscillator.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exit status for a run whose outputs were written but flagged.
pub const EXIT_UNRELIABLE: u8 = 4;
const EXIT_INVALID: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "kerrdpt", version, about = "Driven-dissipative Kerr parametric oscillator toolkit")]
#[command(args_override_self = true)]
struct Cli {
    /// Plain-text `key=value` file of default flag values; explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Loss rate; every other rate is measured against it.
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,

    /// Parent directory for `<command>_<timestamp>/`.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,

    /// Worker threads for independent parameter points (default: all cores).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mean-field order parameter against drive, with exact-diagonalization `U<n>` columns.
    #[command(args_override_self = true)]
    MftSweep(commands::mft::MftArgs),
    /// Absorption, inelastic emission and effective distribution on a frequency grid.
    #[command(args_override_self = true)]
    Spectra(commands::spectra::SpectraArgs),
    /// Liouvillian spectra over a list of Kerr strengths, Wigner maps and fitted exponents.
    #[command(args_override_self = true)]
    EdReport(commands::ed::EdArgs),
    /// Langevin simulation with moments, autocorrelation and decay-rate checks.
    #[command(args_override_self = true)]
    Langevin(commands::langevin::LangevinArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftArg {
    Linear,
    Quintic,
    Full,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<kerrdpt::Error>() {
        Some(e) if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_INVALID,
    }
}

fn main() -> ExitCode {
    let argv = match config::expand(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::MftSweep(a) => commands::run(&a.common.clone(), |c| commands::mft::run(&a, c)),
        Command::Spectra(a) => commands::run(&a.common.clone(), |c| commands::spectra::run(&a, c)),
        Command::EdReport(a) => commands::run(&a.common.clone(), |c| commands::ed::run(&a, c)),
        Command::Langevin(a) => commands::run(&a.common.clone(), |c| commands::langevin::run(&a, c)),
    };
    match result {
        Ok((dir, code)) => {
            println!("{}", dir.display());
            if code == EXIT_UNRELIABLE {
                eprintln!("warning: some results are flagged as cutoff-unreliable; see report.json");
            }
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
