use std::process::ExitCode;

use clap::Parser;
use triwalk::args::Cli;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match triwalk::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("triwalk: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
