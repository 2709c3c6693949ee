//! `lamella`: Casimir pressures between a gold plate and a lamellar grating.
//!
//! Exit codes: 0 ok, 1 I/O failure, 2 configuration error, 3 convergence
//! failure, 4 physics-consistency failure.

mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

use output::Format;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Library(lamella_core::Error),
}

impl CliError {
    pub fn io(e: impl std::fmt::Display) -> Self {
        CliError::Io(e.to_string())
    }

    pub fn exit_code(&self) -> u8 {
        use lamella_core::Error as E;
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) | CliError::Library(E::Domain { .. }) => 2,
            CliError::Library(E::Physics(_)) => 4,
            CliError::Library(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Library(e) => write!(f, "{e}"),
        }
    }
}

impl From<lamella_core::Error> for CliError {
    fn from(e: lamella_core::Error) -> Self {
        CliError::Library(e)
    }
}

#[derive(Debug, Parser)]
#[command(name = "lamella", version, about = "Casimir pressure between a metal plate and a lamellar metal grating")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent. A manifest is written next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: machine parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Knob {
    #[value(name = "N")]
    N,
    MatsubaraCap,
    BzNodes,
    KyNodes,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Pressure curve with the configured method.
    Pressure,
    /// Plane-plane pressure over the grid.
    Lifshitz,
    /// Proximity-force pressure over the grid.
    Pfa,
    /// Effective-medium pressure over the grid.
    Ema,
    /// Decay constants of the grating-layer modes at one Bloch point.
    Modes {
        /// Imaginary frequency, eV (default: first Matsubara frequency).
        #[arg(long)]
        xi: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        kx: f64,
        #[arg(long, default_value_t = 0.0)]
        ky: f64,
    },
    /// Pressure at one distance for a doubling ladder of a numerical knob.
    Convergence {
        #[arg(long, value_enum)]
        knob: Knob,
        /// Distance, nm (default: grid start).
        #[arg(long)]
        d: Option<f64>,
        /// Ladder length.
        #[arg(long, default_value_t = 3)]
        steps: usize,
    },
    /// Pressures of several configurations on a shared grid, with ratios to the first.
    Compare {
        /// Further configurations, compared against `--config` (or the first one given).
        configs: Vec<PathBuf>,
    },
    /// Rolling weighted average of a measured curve, optionally normalised by PFA.
    Smooth {
        /// CSV with d_nm,pressure_mPa,random_err_mPa,systematic_err_mPa.
        #[arg(long)]
        input: PathBuf,
        /// Append ratio,ratio_err to the PFA pressure of the configured geometry.
        #[arg(long)]
        normalize: bool,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads: must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let load = || -> Result<config::RunConfig, CliError> {
        let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config: required".into()))?;
        config::RunConfig::load(path)
    };
    let out = cli.out.as_deref();
    use config::Method;
    let (table, manifest) = match cli.command {
        Command::Pressure => {
            let c = load()?;
            commands::curve(&c, c.method)?
        }
        Command::Lifshitz => commands::curve(&load()?, Method::Lifshitz)?,
        Command::Pfa => commands::curve(&load()?, Method::Pfa)?,
        Command::Ema => commands::curve(&load()?, Method::Ema)?,
        Command::Modes { xi, kx, ky } => commands::modes(&load()?, xi, kx, ky)?,
        Command::Convergence { knob, d, steps } => commands::convergence(&load()?, knob, d, steps)?,
        Command::Compare { configs } => {
            let mut paths: Vec<PathBuf> = cli.config.iter().cloned().collect();
            paths.extend(configs);
            let loaded = paths
                .iter()
                .map(|p| config::RunConfig::load(p))
                .collect::<Result<Vec<_>, _>>()?;
            commands::compare(&loaded)?
        }
        Command::Smooth { input, normalize } => commands::smooth(&load()?, &input, normalize)?,
    };
    table.write(out, cli.format)?;
    if let Some(path) = out {
        output::write_manifest(path, &manifest)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lamella: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
