//! Command line front end: reads a JSON config, runs one experiment and writes
//! its CSV or JSON output to `--out` or standard output.

use std::path::PathBuf;
use std::process::ExitCode;

use aleatory_facility::experiment::{run, Command, ExperimentConfig, ExperimentError};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    version,
    about = "Facility location experiments with reported and drawn agents"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's concentration schedule, e.g. `10,100,1000`.
    #[arg(long, value_delimiter = ',')]
    ell: Option<Vec<u64>>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Optimal facility set and its cost.
    Solve(Common),
    /// Mechanism output, cost and ratio to the optimum.
    Mech(Common),
    /// Ratio bounds for a sweep of sizes and quantile budgets (CSV).
    SarTable(Common),
    /// Ratio trace of a mechanism along an instance family (CSV).
    Adversary(Common),
    /// Two-facility outcome and cost.
    TwoFac(Common),
    /// Largest gain from misreporting found by random search.
    Fuzz(Common),
}

fn execute(cli: Cli) -> Result<(), ExperimentError> {
    let (command, args) = match cli.command {
        Cmd::Solve(a) => (Command::Solve, a),
        Cmd::Mech(a) => (Command::Mech, a),
        Cmd::SarTable(a) => (Command::SarTable, a),
        Cmd::Adversary(a) => (Command::Adversary, a),
        Cmd::TwoFac(a) => (Command::TwoFac, a),
        Cmd::Fuzz(a) => (Command::Fuzz, a),
    };
    let mut cfg = ExperimentConfig::from_json(&std::fs::read_to_string(&args.config)?)?;
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    if args.ell.is_some() {
        cfg.ell = args.ell;
    }
    let text = run(Some(command), &cfg)?;
    match args.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(e.exit_status() as u8)
        }
    }
}
