//! `posmild`: certify, simulate, run refinement studies and plot trajectories.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 uncertifiable field, 3 blow-up
//! flagged, 4 solver error (or non-decreasing error on a convergence ladder).

mod commands;
mod config;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{RunContext, EXIT_USAGE};
use config::{require, Config};

#[derive(Parser)]
#[command(name = "posmild", version, about = "Positivity-certified mild-solution solver")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Seed for certification sampling, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Suppress progress messages on standard error.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the shift and Lipschitz constant on a ball and write the report.
    Certify,
    /// Integrate the configured model and write the trajectory and run metadata.
    Simulate,
    /// Run a reduction benchmark over a refinement ladder.
    Convergence,
    /// Render a trajectory CSV as SVG.
    Plot {
        csv: PathBuf,
        /// Output file; defaults to `<out>/<csv stem>.svg`.
        svg: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let ctx = RunContext {
        out: cli.out,
        quiet: cli.quiet,
    };
    let load = || -> anyhow::Result<Config> {
        let mut cfg = Config::load(require(cli.config.as_deref())?)?;
        cfg.override_seed(cli.seed);
        Ok(cfg)
    };
    match cli.command {
        Command::Certify => commands::certify(&load()?, &ctx),
        Command::Simulate => commands::simulate(&load()?, &ctx),
        Command::Convergence => commands::convergence(&load()?, &ctx),
        Command::Plot { csv, svg } => commands::plot(&csv, svg.as_deref(), &ctx),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
