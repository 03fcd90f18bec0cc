//! `saddle`: expand, verify and tabulate saddle-point integrals from problem files.

mod error;
mod expand;
mod fmt;
mod genfun;
mod problem;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliError;
use crate::problem::{parse_seed, Problem};

#[derive(Parser)]
#[command(
    name = "saddle",
    version,
    about = "Asymptotic expansions of saddle-point integrals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Expansion order L (overrides the problem file).
    #[arg(long, global = true)]
    order: Option<u32>,
    /// Absolute quadrature tolerance for `verify`.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Single Newton seed, e.g. "x=0.1,y=0".
    #[arg(long, global = true)]
    seed: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the coefficients at every stationary point.
    Expand { file: PathBuf },
    /// Compare partial sums with adaptive quadrature over the lambda ladder.
    Verify {
        file: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Coefficient asymptotics for a two-divisor generating function.
    Genfun { file: PathBuf },
}

/// Command-line settings that override a problem file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub order: Option<u32>,
    pub tol: Option<f64>,
    pub seed: Option<Vec<f64>>,
}

fn overrides(cli: &Cli, problem: &Problem) -> Result<Overrides, CliError> {
    let seed = match &cli.seed {
        Some(text) => Some(parse_seed(text, &problem.names())?),
        None => None,
    };
    if cli.tol.is_some_and(|t| !(t.is_finite() && t > 0.0)) {
        return Err(CliError::Invalid("--tol must be positive".into()));
    }
    Ok(Overrides {
        order: cli.order,
        tol: cli.tol,
        seed,
    })
}

fn run(cli: &Cli, out: &mut String) -> Result<(), CliError> {
    match &cli.command {
        Command::Expand { file } => {
            let problem = Problem::load(file)?;
            expand::run(&problem, &overrides(cli, &problem)?, out)
        }
        Command::Verify { file, csv } => {
            let problem = Problem::load(file)?;
            let path = csv.as_deref().or(problem.file.output.csv.as_deref());
            verify::run(&problem, &overrides(cli, &problem)?, path, out)
        }
        Command::Genfun { file } => genfun::run(file, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = String::new();
    let result = run(&cli, &mut out);
    print!("{out}");
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
