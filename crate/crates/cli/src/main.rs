//! `filmvortex` command-line front end.
//!
//! Exit codes: 0 on success, 1 for configuration and input errors, 2 for
//! numerical failures.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Context, Failure};
use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "filmvortex", version, about = "Vortex density solver for curved thin films")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Grid resolution, overriding `grid.resolution`.
    #[arg(long, global = true, value_name = "N")]
    resolution: Option<usize>,
    /// Suppress progress messages.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Solve the obstacle problem at one applied field.
    Solve,
    /// Solve along a range of field strengths.
    Sweep,
    /// Bisect for the field at which a coincidence set appears.
    Critical,
    /// Check the weighted Hodge decomposition.
    HodgeCheck,
    /// Recover vortex configurations and report the energy gap.
    GammaCheck,
}

fn context(cli: &Cli) -> Result<Context, Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::config(config::ConfigError("--config PATH is required".into())))?;
    let mut config = RunConfig::load(path).map_err(Failure::config)?;
    if let Some(n) = cli.resolution {
        config.grid.resolution = n;
    }
    config.validate().map_err(Failure::config)?;
    let out = cli.out.clone().unwrap_or_else(|| config.output.dir.clone());
    Ok(Context {
        config,
        out,
        quiet: cli.quiet,
    })
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let ctx = context(cli)?;
    match cli.command {
        Command::Solve => commands::cmd_solve(&ctx),
        Command::Sweep => commands::cmd_sweep(&ctx),
        Command::Critical => commands::cmd_critical(&ctx),
        Command::HodgeCheck => commands::cmd_hodge_check(&ctx),
        Command::GammaCheck => commands::cmd_gamma_check(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error [{}]: {}", f.stage, f.message);
            ExitCode::from(f.code)
        }
    }
}
