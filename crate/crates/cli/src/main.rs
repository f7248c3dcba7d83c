//! `ssmred`: JSON experiment configs in, CSV logs + JSON reports + SVG
//! line plots out. Exit codes: 0 success, 2 config error, 3 simulation
//! fault, 4 fit failure.

mod commands;
mod config;
mod error;
mod svg;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::identify::ModelKind;

#[derive(Parser)]
#[command(name = "ssmred", version, about = "Actuator simulation, reduced-model identification and tracking-control benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a configured plant under a configured input.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a reduced model from generated training trajectories.
    Identify {
        #[arg(long)]
        config: PathBuf,
        /// Which model to fit.
        #[arg(long, value_enum)]
        kind: ModelKind,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare model predictions against the truth across slowness targets.
    RhoSweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the three-controller tracking benchmark on the joint plant.
    ControlBench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate { config, out } => commands::simulate::run(config, out),
        Command::Identify { config, kind, out } => commands::identify::run(config, *kind, out),
        Command::RhoSweep { config, out } => commands::rho_sweep::run(config, out),
        Command::ControlBench { config, out } => commands::control_bench::run(config, out),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
