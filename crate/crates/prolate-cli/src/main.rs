mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde::Serialize;

use config::{Resolved, RunConfig};
use error::{CliError, Result};

#[derive(Parser)]
#[command(name = "prolate", version, about = "Commuting operators for time-band limiting of bispectral families")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    #[command(flatten)]
    run: RunConfig,
    /// JSON file whose values override the flags
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Common {
    fn resolve(self) -> Result<Resolved> {
        let run = match &self.config {
            Some(p) => self.run.overlay(RunConfig::from_file(p)?),
            None => self.run,
        };
        Resolved::new(run)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the commuting pair and write a JSON report
    Solve(Common),
    /// Run every verification check and write a defect table
    Verify(Common),
    /// Write K on a grid and the J matrix as CSV into --out (a directory)
    EmitKernel {
        #[command(flatten)]
        common: Common,
        /// Use the whole support instead of the band interval
        #[arg(long)]
        full: bool,
    },
    /// List the supported families and their parameter constraints
    Families,
}

#[derive(Serialize)]
struct ErrorOut<'a> {
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    code: i32,
    message: String,
}

fn fail(e: &CliError) -> ExitCode {
    let body = ErrorOut { error: ErrorBody { kind: e.kind(), code: e.exit_code(), message: e.to_string() } };
    eprintln!("{}", serde_json::to_string(&body).expect("error body serializes"));
    ExitCode::from(e.exit_code() as u8)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve(c) => commands::solve(&c.resolve()?),
        Command::Verify(c) => commands::verify(&c.resolve()?),
        Command::EmitKernel { common, full } => commands::emit_kernel(&common.resolve()?, full),
        Command::Families => commands::families(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&CliError::Config(e.to_string().trim().to_string())),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
