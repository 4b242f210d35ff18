//! `iabc`: check the tight condition on a graph, simulate the trimmed-mean
//! protocol against a chosen adversary, certify traces, generate graphs and
//! sweep fault sets.
//!
//! Exit codes: 0 success or condition holds, 1 negative result, 2 usage or
//! parse error. `IABC_LOG` sets the log level.

use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod certify;
mod check;
mod generate;
mod inputs;
mod output;
mod simulate;
mod sweep;

/// Why a command did not succeed.
#[derive(Debug)]
pub enum Failure {
    /// Malformed input or arguments (exit 2).
    Parse(anyhow::Error),
    /// The question was answered and the answer is no (exit 1).
    Negative(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Parse(_) => 2,
            Failure::Negative(_) => 1,
        }
    }
}

/// I/O trouble while writing outputs is reported like a parse error: the run
/// could not be carried out as asked.
impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Parse(e)
    }
}

pub type Outcome = Result<(), Failure>;

#[derive(Parser, Debug)]
#[command(name = "iabc", version, about = "Iterative approximate Byzantine consensus toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether every reduced graph has exactly one source component
    Check(check::CheckArgs),
    /// Run the trimmed-mean protocol and write the trace
    Simulate(simulate::SimulateArgs),
    /// Check a trace against the transition-matrix analysis
    Certify(certify::CertifyArgs),
    /// Write a graph from a named family
    Generate(generate::GenerateArgs),
    /// Simulate every maximal fault set against several adversaries
    Sweep(sweep::SweepArgs),
    /// List the built-in adversary strategies
    Adversaries,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("IABC_LOG", "warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Check(a) => check::run(a),
        Command::Simulate(a) => simulate::run(a),
        Command::Certify(a) => certify::run(a),
        Command::Generate(a) => generate::run(a),
        Command::Sweep(a) => sweep::run(a),
        Command::Adversaries => list_adversaries(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Parse(e) => eprintln!("error: {e:#}"),
                Failure::Negative(e) => eprintln!("{e:#}"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn list_adversaries() -> Outcome {
    for a in iabc::engine::builtin_adversaries() {
        println!("{:<10} {:<64} {}", a.id, a.syntax, a.description);
    }
    Ok(())
}
