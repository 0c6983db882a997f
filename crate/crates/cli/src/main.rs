//! `annulus-dyn`: field evaluation, phase portraits, equilibrium scans,
//! bifurcation search and orbit propagation for annular-disk potentials.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical-domain error,
//! 4 convergence failure. Failures also emit a machine-readable JSON record
//! on stderr.

mod commands;
mod config;
mod grid;
mod output;

use clap::{Parser, Subcommand};
use config::RunConfig;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(std::io::Error),
    Core(annulus_core::Error),
}

impl From<annulus_core::Error> for CliError {
    fn from(e: annulus_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Core(e) => match e {
                annulus_core::Error::Convergence(_)
                | annulus_core::Error::IntegrationFailure { .. } => "convergence",
                _ => "domain",
            },
        }
    }

    fn exit_code(&self) -> u8 {
        match self.kind() {
            "config" | "io" => 2,
            "domain" => 3,
            "convergence" => 4,
            _ => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Config(m) => m.clone(),
            CliError::Io(e) => e.to_string(),
            CliError::Core(e) => e.to_string(),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "annulus-dyn",
    version,
    about = "Potential fields and particle dynamics of annular disks"
)]
struct Cli {
    /// Config file (JSON); bare names are also looked up in
    /// $ANNULUS_DYN_CONFIG_DIR
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the single-annulus outer radius
    #[arg(long, global = true)]
    a: Option<f64>,
    /// Override the single-annulus inner radius
    #[arg(long, global = true)]
    b: Option<f64>,
    /// Override the gravitational parameter mu = G M
    #[arg(long, global = true)]
    mu: Option<f64>,
    /// Worker threads for grids and level sets (output is identical for any
    /// value)
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate potential and gradient on a grid or line
    Eval(commands::EvalArgs),
    /// Emit phase-portrait level curves (and optionally the W' curve)
    Portrait(commands::PortraitArgs),
    /// Locate and classify critical points of the effective potential
    Equilibria(commands::EquilibriaArgs),
    /// Bisect the angular momentum where the exterior orbit pair is born
    Bifurcation(commands::BifurcationArgs),
    /// Propagate an orbit with collision/escape/edge event detection
    Orbit(commands::OrbitArgs),
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(cli.config.as_deref(), cli.a, cli.b, cli.mu)?;
    match &cli.command {
        Command::Eval(args) => commands::run_eval(&cfg, cli.threads, args),
        Command::Portrait(args) => commands::run_portrait(&cfg, cli.threads, args),
        Command::Equilibria(args) => commands::run_equilibria(&cfg, args),
        Command::Bifurcation(args) => commands::run_bifurcation(&cfg, args),
        Command::Orbit(args) => commands::run_orbit(&cfg, args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let record = serde_json::json!({
                "error": { "kind": e.kind(), "message": e.message() }
            });
            eprintln!("{record}");
            ExitCode::from(e.exit_code())
        }
    }
}
