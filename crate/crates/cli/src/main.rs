use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser};

use symscheme_cli::config::{RunConfig, Subcommand};
use symscheme_cli::error::CliError;
use symscheme_cli::output::{write_tables, Format};

#[derive(Parser)]
#[command(name = "symscheme", version, about = "Order-by-order asymptotic solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Subcommand)]
enum Command {
    /// Asymptotic fundamental systems of half-line operators.
    Ode(Flags),
    /// Right parametrices of elliptic operators on the circle.
    Parametrix(Flags),
    /// Conormal solutions of second-order hyperbolic equations.
    Wave(Flags),
    /// The generic engine with per-level residuals.
    SchemeDemo(Flags),
}

#[derive(Args)]
struct Flags {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Expansion depth J (overrides the config).
    #[arg(long, value_name = "J")]
    order: Option<usize>,
    /// Output directory (overrides the config).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

fn execute(sub: Subcommand, flags: &Flags) -> Result<(), CliError> {
    let text = fs::read_to_string(&flags.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", flags.config.display())))?;
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(j) = flags.order {
        cfg.order = j;
    }
    if let Some(f) = flags.format {
        cfg.format = f;
    }
    if let Some(s) = flags.seed {
        cfg.seed = s;
    }
    if let Some(o) = &flags.out {
        cfg.out = Some(o.clone());
    }
    let report = symscheme_cli::run(sub, &cfg)?;
    for line in &report.lines {
        println!("{line}");
    }
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out").join(sub.name()));
    write_tables(&out, cfg.format, &report.tables)?;
    println!("wrote {} tables to {}", report.tables.len(), out.display());
    match report.failure {
        Some(msg) => Err(CliError::Acceptance(msg)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (sub, flags) = match &cli.command {
        Command::Ode(f) => (Subcommand::Ode, f),
        Command::Parametrix(f) => (Subcommand::Parametrix, f),
        Command::Wave(f) => (Subcommand::Wave, f),
        Command::SchemeDemo(f) => (Subcommand::SchemeDemo, f),
    };
    match execute(sub, flags) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
