//! `projlab` — relaxed-projection experiments from scenario files.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use projlab_cli::commands;
use projlab_cli::scenario::Scenario;
use projlab_cli::{CliError, CliResult};

#[derive(Parser)]
#[command(
    name = "projlab",
    version,
    about = "Relaxed orthogonal projections onto subspace families: angles, \
             constants, trajectories, and bound checks",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario file (TOML)
    #[arg(long, value_name = "FILE")]
    config: PathBuf,

    /// Output directory (overrides the scenario's [outputs] dir)
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Replace every seed in the scenario with this value
    #[arg(long, value_name = "SEED")]
    seed_override: Option<u64>,

    /// Also write the per-step trajectory CSV (simulate)
    #[arg(long)]
    retain_iterates: bool,

    /// Suppress the stdout summary
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Friedrichs angles of all intersection pairs and the level kappa*
    Angles(CommonArgs),
    /// Theoretical constants of the family at each requested gamma
    Constants(CommonArgs),
    /// Run one trajectory and check every displacement bound on it
    Simulate(CommonArgs),
    /// Run a seeded ensemble per eta and aggregate bound ratios
    Sweep(CommonArgs),
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Angles(c)
            | Command::Constants(c)
            | Command::Simulate(c)
            | Command::Sweep(c) => c,
        }
    }
}

/// Caps the rayon worker pool when PROJLAB_THREADS is set.
fn init_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("PROJLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| {
            CliError::Config(format!(
                "PROJLAB_THREADS = {raw:?} must be a positive integer"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot size the worker pool: {e}")))
}

fn run() -> CliResult<()> {
    let cli = Cli::parse();
    init_threads()?;
    let common = cli.command.common();
    let mut scenario = Scenario::load(&common.config)?;
    if let Some(seed) = common.seed_override {
        scenario.override_seeds(seed);
    }
    let out = scenario.out_dir(common.out.as_deref());
    match &cli.command {
        Command::Angles(c) => commands::cmd_angles(&scenario, &out, c.quiet),
        Command::Constants(c) => commands::cmd_constants(&scenario, &out, c.quiet),
        Command::Simulate(c) => {
            commands::cmd_simulate(&scenario, &out, c.retain_iterates, c.quiet)
        }
        Command::Sweep(c) => commands::cmd_sweep(&scenario, &out, c.quiet),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
