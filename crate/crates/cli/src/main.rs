//! `ppscert`: certified upper bounds for polynomial systems, pushdown
//! automata and probabilistic programs.
//!
//! Exit codes: 0 certified or valid, 1 not certified or invalid, 2 input error.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "ppscert", version, about = "Certified least-fixpoint bounds for positive polynomial systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute and verify an inductive upper bound (`.pps`, `.ppda`, `.ppl`, or `-` for a `.pps` on stdin).
    Certify(CertifyArgs),
    /// Verify a certificate against a system.
    Check {
        system: PathBuf,
        certificate: PathBuf,
    },
    /// Write the pPDA and return system of a program (or the return system of a `.ppda`).
    Translate {
        program: PathBuf,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
pub enum StrategyArg {
    Eigenvector,
    Relative,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum UpdateArg {
    GaussSeidel,
    Kleene,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportArg {
    Json,
    Text,
}

#[derive(Args)]
pub struct CertifyArgs {
    pub input: String,
    #[arg(long, default_value = "1e-3")]
    pub epsilon: String,
    #[arg(long, default_value_t = 0.1)]
    pub c: f64,
    #[arg(long, default_value_t = 0.5)]
    pub d: f64,
    #[arg(long, default_value_t = 10)]
    pub max_guesses: usize,
    #[arg(long, value_enum, default_value = "eigenvector")]
    pub strategy: StrategyArg,
    #[arg(long, value_enum, default_value = "gauss-seidel")]
    pub update: UpdateArg,
    #[arg(long, default_value_t = 10)]
    pub kmax: u32,
    /// Derive lower bounds on the output distribution assuming almost-sure termination.
    #[arg(long)]
    pub assume_ast: bool,
    /// Bound the probability of reaching this state instead of terminating normally.
    #[arg(long)]
    pub bad_state: Option<String>,
    /// Per-state rewards (`<state> <value>` lines); bounds expected rewards.
    #[arg(long)]
    pub reward: Option<PathBuf>,
    /// Rewrite one-symbol pushes so the reward system can be built.
    #[arg(long)]
    pub normalize_arity: bool,
    #[arg(long, value_enum, default_value = "text")]
    pub report: ReportArg,
    /// Worker threads for independent components.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Certificate path; defaults to `<input stem>.cert` in the working directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Certify(args) => commands::certify(&args),
        Command::Check { system, certificate } => commands::check(&system, &certificate),
        Command::Translate { program, out_dir } => commands::translate(&program, &out_dir),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
