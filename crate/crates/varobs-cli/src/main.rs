use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    ExitCode::from(varobs_cli::main_with(varobs_cli::Cli::parse()))
}
