use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = bellforge::cli::Cli::parse();
    ExitCode::from(bellforge::cli::execute(&cli) as u8)
}
