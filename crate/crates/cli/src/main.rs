//! `pwlnn`: fit, evaluate, convert and analyse piecewise-linear models.

mod commands;
mod config;
mod error;
mod fit;
mod io;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::{CliResult, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(name = "pwlnn", version, about = "Piecewise-linear model toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a model to a CSV dataset.
    Fit(fit::FitCmd),
    /// Evaluate a model on points or a grid.
    Eval(commands::EvalCmd),
    /// Convert between representations and check equivalence.
    Convert(commands::ConvertCmd),
    /// Check continuity and CPLR representability.
    Validate(commands::ValidateCmd),
    /// Count the linear regions of a network.
    Regions(commands::RegionsCmd),
    /// Compare two models on a box.
    Equiv(commands::EquivCmd),
    /// Fit and write a plot-ready trace CSV.
    TraceExport(fit::TraceExportCmd),
}

fn run(cmd: &Command) -> CliResult<String> {
    match cmd {
        Command::Fit(c) => fit::cmd_fit(c),
        Command::Eval(c) => commands::cmd_eval(c),
        Command::Convert(c) => commands::cmd_convert(c),
        Command::Validate(c) => commands::cmd_validate(c),
        Command::Regions(c) => commands::cmd_regions(c),
        Command::Equiv(c) => commands::cmd_equiv(c),
        Command::TraceExport(c) => fit::cmd_trace_export(c),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli.command) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            if !matches!(e, error::CliError::Violations) {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.code())
        }
    }
}
