use std::process::ExitCode;

use clap::Parser;
use fairbits::cli::{run, Cli, EXIT_ERROR};

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
