use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fixpoint_lab::report_cli::{self, CliOverrides, Command, RunConfig, EXIT_USAGE, SEED_ENV};

#[derive(Parser)]
#[command(name = "fixpoint-lab", version, about = "Numerical certificates for Kannan-type fixed point theorems")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check contractive conditions on one map
    Check(Flags),
    /// Multi-start Picard iteration with trajectory bounds
    Solve(Flags),
    /// Run the catalog battery and acceptance criteria
    Suite(Flags),
}

#[derive(Args)]
struct Flags {
    /// key = value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Report path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of epsilon grid values
    #[arg(long)]
    grid: Option<usize>,
    /// Number of random sample pairs
    #[arg(long)]
    samples: Option<usize>,
    /// Certificate tolerance
    #[arg(long)]
    tol: Option<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    let (cmd, flags) = match cli.command {
        Cmd::Check(f) => (Command::Check, f),
        Cmd::Solve(f) => (Command::Solve, f),
        Cmd::Suite(f) => (Command::Suite, f),
    };
    let overrides = CliOverrides {
        seed: flags.seed,
        out: flags.out,
        grid: flags.grid,
        samples: flags.samples,
        tol: flags.tol,
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    let cfg = match RunConfig::load(flags.config.as_deref(), &overrides, env_seed.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    ExitCode::from(report_cli::run(cmd, &cfg) as u8)
}
