//! `pood`: evaluate OOD detection by downstream performance drop.
//!
//! Exit codes: 0 success, 1 data error (missing files, schema or validation
//! failures), 2 usage error (bad flags or flag combinations).

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod common;
mod eval;
mod sweep;
mod synth_cmd;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl From<pood::Error> for CliError {
    fn from(err: pood::Error) -> Self {
        CliError::Data(err.to_string())
    }
}

pub fn usage(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}

#[derive(Parser)]
#[command(
    name = "pood",
    version,
    about = "Performance-aware evaluation of out-of-distribution detection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate score tables into ranked metric reports
    Eval(eval::EvalArgs),
    /// Generate and run the synthetic segmentation benchmark
    #[command(subcommand)]
    Synth(SynthCommand),
    /// Severity sweep (EPD and 1-AUROC per severity) from a score table
    Sweep(sweep::SweepArgs),
}

#[derive(Subcommand)]
enum SynthCommand {
    /// Render a benchmark world to disk
    Gen(synth_cmd::GenArgs),
    /// Score a saved world into a records CSV
    Run(synth_cmd::RunArgs),
}

#[derive(Args)]
pub struct OutputDir {
    /// Output directory
    #[arg(long)]
    pub out: std::path::PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eval(args) => eval::run(args),
        Command::Synth(SynthCommand::Gen(args)) => synth_cmd::run_gen(args),
        Command::Synth(SynthCommand::Run(args)) => synth_cmd::run_run(args),
        Command::Sweep(args) => sweep::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(message)) => {
            eprintln!("usage error: {message}");
            ExitCode::from(2)
        }
        Err(CliError::Data(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}
