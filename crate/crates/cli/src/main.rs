mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Random-phase quantum turbulence: evolve, decompose, detect and correlate.
#[derive(Debug, Parser)]
#[command(name = "qvort", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run config; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the random-phase initial condition at t = 0.
    Init(InitArgs),
    /// Propagate a snapshot exactly to each requested time.
    Evolve(EvolveArgs),
    /// Flow decomposition, spectra and fits for a snapshot.
    Flow(FlowArgs),
    /// Detect point vortices (2D) or trace vortex lines (3D).
    Vortices(VortexArgs),
    /// Two-point vortex correlations from a vortex JSON file.
    Correlate(CorrelateArgs),
    /// Closed-form reference fields.
    #[command(subcommand)]
    Analytic(AnalyticCommand),
}

#[derive(Debug, Args)]
pub struct InitArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    dims: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    length: Option<f64>,
    #[arg(long)]
    dk: Option<f64>,
    #[arg(long)]
    s_rms: Option<f64>,
    #[arg(long)]
    k_center: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    common: Common,
    input: PathBuf,
    /// Comma-separated output times.
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<f64>>,
    /// Read the times as fractions of the recurrence time L^2/pi.
    #[arg(long)]
    recurrence_units: bool,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    #[command(flatten)]
    common: Common,
    input: PathBuf,
    /// Velocity cap in units of 1/dx.
    #[arg(long)]
    clip: Option<f64>,
    #[arg(long)]
    fit_lo: Option<f64>,
    #[arg(long)]
    fit_hi: Option<f64>,
    /// Default the fit range to the cascade range [2 dk, n/8].
    #[arg(long)]
    pre_vortex: bool,
}

#[derive(Debug, Args)]
pub struct VortexArgs {
    #[command(flatten)]
    common: Common,
    input: PathBuf,
    /// Add per-vortex null, material and induced velocities.
    #[arg(long)]
    velocities: bool,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    #[command(flatten)]
    common: Common,
    input: PathBuf,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    r_min: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    /// Grid of the source snapshot when the vortex file does not record it.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    length: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum AnalyticCommand {
    /// Two-vortex Bessel pattern c0 - J1(kr) e^{i phi}, tapered beyond the first zero.
    Bessel(BesselArgs),
    /// Linearized vortex a u + i b v with its phase, compression and velocity table.
    Local(LocalArgs),
}

#[derive(Debug, Args)]
pub struct BesselArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    c0: f64,
    #[arg(long)]
    k: f64,
    #[arg(long, default_value_t = 256)]
    n: usize,
    /// Box size; defaults to 16/k.
    #[arg(long)]
    length: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    t: f64,
}

#[derive(Debug, Args)]
pub struct LocalArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    /// Frame rotation in radians.
    #[arg(long, default_value_t = 0.0)]
    orientation: f64,
    #[arg(long, default_value_t = 256)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    length: f64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Some(t) = qvort_core::par::init_from_env() {
        log::info!("worker threads capped at {t}");
    }
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Init(a) => commands::init(a),
        Command::Evolve(a) => commands::evolve(a),
        Command::Flow(a) => commands::flow(a),
        Command::Vortices(a) => commands::vortices(a),
        Command::Correlate(a) => commands::correlate(a),
        Command::Analytic(AnalyticCommand::Bessel(a)) => commands::bessel(a),
        Command::Analytic(AnalyticCommand::Local(a)) => commands::local(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qvort: {e}");
            ExitCode::FAILURE
        }
    }
}
