use clap::Parser;
use imgmine::commands::{run, Cli};
use std::process::ExitCode;

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("imgmine: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
