mod commands;
mod config;
mod error;
mod output;
mod svg;

use std::process::ExitCode;

use clap::Parser;

use config::{Cli, RunConfig, TOL_ENV};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result =
        RunConfig::from_cli(cli, std::env::var(TOL_ENV).ok()).and_then(|cfg| commands::run(&cfg));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(e.exit_code())
        }
    }
}
