use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use dipolar::KernelSign;
use dipolar_cli::commands::{self, Outcome};
use dipolar_cli::config::{read_json, Overrides, RunConfig, RunFile, SolverChoice, SweepConfig};

/// Two dipole-coupled atoms in a leaky cavity: trajectories, concurrence
/// sweeps and solver cross-checks.
#[derive(Parser)]
#[command(name = "dipolar", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output file (stdout when omitted).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Also write an SVG chart next to the output file.
    #[arg(long, global = true)]
    svg: bool,

    #[arg(long, global = true, value_enum)]
    solver: Option<SolverChoice>,

    /// Worker threads for sweeps (default: available processors).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    /// Final time, in the same units as the rates.
    #[arg(long = "t-end", global = true, value_name = "REAL")]
    t_end: Option<f64>,

    /// Use fixed-step RK4 with this step instead of the adaptive integrator.
    #[arg(long = "fixed-dt", global = true, value_name = "REAL")]
    fixed_dt: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration and write its trajectory CSV.
    Run,
    /// Concurrence over a grid of tau for a list of K values.
    Sweep,
    /// Characteristic roots, residuals and steady-state verdict.
    Roots,
    /// Cross-check the three solvers and the leak-rate identity.
    Verify {
        /// Flip the sign of the memory kernel (negative control).
        #[arg(long, hide = true)]
        corrupt_kernel: bool,
    },
}

fn dispatch(cli: Cli) -> Result<Outcome> {
    let config = cli
        .config
        .as_deref()
        .context("--config <PATH> is required")?;
    let ov = Overrides {
        out: cli.out.clone(),
        svg: cli.svg,
        solver: cli.solver,
        t_end: cli.t_end,
        fixed_dt: cli.fixed_dt,
    };
    match cli.command {
        Command::Run => commands::cmd_run(&RunConfig::load(config, &ov)?),
        Command::Sweep => {
            let jobs = match cli.jobs {
                Some(0) => anyhow::bail!("--jobs must be at least 1"),
                Some(n) => n,
                None => std::thread::available_parallelism().map_or(1, |n| n.get()),
            };
            commands::cmd_sweep(&SweepConfig::load(config, &ov)?, jobs)
        }
        Command::Roots => {
            let file: RunFile = read_json(config)?;
            commands::cmd_roots(&file, cli.out.as_deref())
        }
        Command::Verify { corrupt_kernel } => {
            let kernel = if corrupt_kernel {
                KernelSign::Flipped
            } else {
                KernelSign::Physical
            };
            commands::cmd_verify(&RunConfig::load(config, &ov)?, kernel)
        }
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors by itself.
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::ChecksFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
