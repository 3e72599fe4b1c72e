use std::process::ExitCode;

use clap::Parser;
use mps_cli::args::Cli;
use mps_cli::commands::execute;

fn main() -> ExitCode {
    // clap exits with 2 on usage errors, matching the config-error code.
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
