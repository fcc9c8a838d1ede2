use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod config;
mod error;
mod run;

use run::{execute, Scenario};

/// Scenario runner for the solitary-wave chain experiments.
#[derive(Parser)]
#[command(name = "gsl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Worker threads for the case sweep (defaults to all cores).
    #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: Option<u16>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve traveling-wave profiles and report residuals.
    TwCheck(Common),
    /// Evolve a chain and record conserved quantities.
    Evolve(Common),
    /// Perturbed chain with modulation tracking and gap probes.
    Stability(Common),
    /// Backward-in-time construction and Cauchy check.
    Nsoliton(Common),
    /// Measured small-amplitude frequencies against the dispersion relation.
    Dispersion(Common),
    /// Cutoff momentum in a frame tracking a gap.
    Monotonicity(Common),
}

fn dispatch<S: Scenario>(c: &Common) -> ExitCode {
    match execute::<S>(&c.config, c.jobs.map(usize::from)) {
        Ok(s) if s.cases == 0 => {
            println!("{}: no cases", S::NAME);
            ExitCode::SUCCESS
        }
        Ok(s) => {
            println!("{}: {} cases, output in {}", S::NAME, s.cases, s.out.display());
            for a in &s.artifacts {
                println!("  {}", a.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("gsl {}: {e}", S::NAME);
            ExitCode::from(e.exit_code())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::TwCheck(c) => dispatch::<run::TwCheck>(c),
        Command::Evolve(c) => dispatch::<run::Evolve>(c),
        Command::Stability(c) => dispatch::<run::Stability>(c),
        Command::Nsoliton(c) => dispatch::<run::Nsoliton>(c),
        Command::Dispersion(c) => dispatch::<run::Dispersion>(c),
        Command::Monotonicity(c) => dispatch::<run::Monotonicity>(c),
    }
}
