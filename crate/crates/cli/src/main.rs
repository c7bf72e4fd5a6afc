//! `mkdv`: run the profile numerics from a config file and write CSV/JSON artifacts.
//!
//! Exit codes: 0 success, 2 configuration error, 3 acceptance failure,
//! 4 numerical instability.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mkdv_core::Error;

#[derive(Parser)]
#[command(name = "mkdv", version, about = "Fourier-profile numerics for the modified KdV equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct Common {
    /// Flat `key = value` config file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Overrides `output_dir` from the config and `MKDV_OUTPUT_DIR`.
    #[arg(long, short)]
    output_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the Airy–Fock function and its derivative.
    Airy(Common),
    /// Physical-space solution of a profile, with its leading Airy term.
    Reconstruct(Common),
    /// Nonlinearity by every route and the stationary-phase remainder.
    Nonlin(Common),
    /// Integrate the profile equation.
    Evolve(Common),
    /// Solve for a self-similar profile.
    Selfsimilar(Common),
    /// Evolve, then extract the asymptotic profile.
    Scatter(Common),
    /// Run an acceptance suite.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long, short)]
        output_dir: Option<PathBuf>,
    },
}

pub enum Failure {
    Core(Error),
    Acceptance(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Instability { .. } | Error::NoConvergence { .. } | Error::Fit(_) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Airy(c) => commands::airy(c.load("airy")),
        Command::Reconstruct(c) => commands::reconstruct(c.load("reconstruct")),
        Command::Nonlin(c) => commands::nonlin(c.load("nonlin")),
        Command::Evolve(c) => commands::evolve(c.load("evolve")),
        Command::Selfsimilar(c) => commands::selfsimilar(c.load("selfsimilar")),
        Command::Scatter(c) => commands::scatter(c.load("scatter")),
        Command::Verify { suite, output_dir } => commands::verify(&suite, output_dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Acceptance(msg)) => {
            eprintln!("acceptance failure: {msg}");
            ExitCode::from(3)
        }
    }
}

impl Common {
    fn load(&self, sub: &str) -> Result<config::RunConfig, Error> {
        config::RunConfig::load(sub, self.config.as_deref(), self.output_dir.clone())
    }
}
