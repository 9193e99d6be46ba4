//! `kleinbarrier`: transmission, phase times, limits, wave packets and sweeps
//! for a relativistic spin-0 particle on a rectangular barrier.
//!
//! Exit codes: 0 success, 1 computation error, 2 usage error.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::CliConfig;
use crate::report::Units;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(kleinbarrier::Error),
}

impl From<kleinbarrier::Error> for CliError {
    fn from(e: kleinbarrier::Error) -> Self {
        CliError::Compute(e)
    }
}

#[derive(Debug, Parser)]
#[command(name = "kleinbarrier", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Energy zone and interior channel of one incident energy
    Zone(PointArgs),
    /// Transmission and reflection amplitudes: exact and closed forms
    Amp(PointArgs),
    /// Traversal time, phase time and their ratio
    Phasetime(PointArgs),
    /// Small-ρ and zone-edge limit values at both edges
    Limits(PointArgs),
    /// Wave-packet arrival and spectral distortion
    Packet(PacketArgs),
    /// Parameter sweep over n²
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// JSON configuration file; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print JSON instead of text
    #[arg(long, global = true)]
    json: bool,
    /// Display units for text output
    #[arg(long, value_enum, default_value = "natural", global = true)]
    units: Units,
    /// Write output to this path instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[allow(non_snake_case)]
struct SetupArgs {
    /// Particle mass
    #[arg(long)]
    m: Option<f64>,
    /// Barrier height (overrides --v)
    #[arg(long = "V0")]
    V0: Option<f64>,
    /// Barrier width (overrides --wL)
    #[arg(long = "L")]
    L: Option<f64>,
    /// Dimensionless height V0/m
    #[arg(long)]
    v: Option<f64>,
    /// Dimensionless width w·L, w = sqrt(2 m V0)
    #[arg(long = "wL")]
    wL: Option<f64>,
}

#[derive(Debug, Args)]
#[allow(non_snake_case)]
struct EnergyArgs {
    /// Total energy
    #[arg(long = "E")]
    E: Option<f64>,
    /// Dimensionless n² = k²/w²
    #[arg(long)]
    n2: Option<f64>,
}

#[derive(Debug, Args)]
struct PointArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    setup: SetupArgs,
    #[command(flatten)]
    energy: EnergyArgs,
}

#[derive(Debug, Args)]
struct PacketArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    setup: SetupArgs,
    #[command(flatten)]
    energy: EnergyArgs,
    /// Spectrum centre (instead of --E / --n2)
    #[arg(long)]
    k0: Option<f64>,
    /// Spectral width (absolute)
    #[arg(long)]
    sigma_k: Option<f64>,
    /// Spectral width as a fraction of k0 (default 0.02)
    #[arg(long)]
    sigma_frac: Option<f64>,
    /// Support truncation in units of sigma_k (default 6)
    #[arg(long)]
    support: Option<f64>,
    /// Number of time samples (default 2001)
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    setup: SetupArgs,
    /// Smallest n² (default n2_max / count)
    #[arg(long)]
    n2_min: Option<f64>,
    /// Largest n² (default v/2 + 3, or 3 for v = 0)
    #[arg(long)]
    n2_max: Option<f64>,
    /// Number of grid points (default 2000)
    #[arg(long)]
    count: Option<usize>,
    /// Comma-separated columns: T2_exact,T2_eq4,phase,ratio_eq7,ratio_numeric
    #[arg(long, value_delimiter = ',')]
    outputs: Option<Vec<String>>,
    /// Named preset; `fig1` writes the five wL = 2π datasets into --out (a directory)
    #[arg(long)]
    preset: Option<String>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    workers: Option<usize>,
}

impl SetupArgs {
    fn to_config(&self, energy: Option<&EnergyArgs>) -> CliConfig {
        CliConfig {
            m: self.m,
            v0: self.V0,
            l: self.L,
            v: self.v,
            wl: self.wL,
            energy: energy.and_then(|e| e.E),
            n2: energy.and_then(|e| e.n2),
            ..CliConfig::default()
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Compute(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
