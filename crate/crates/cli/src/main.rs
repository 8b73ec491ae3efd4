use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    match cmaoe_cli::commands::run(cmaoe_cli::commands::Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
