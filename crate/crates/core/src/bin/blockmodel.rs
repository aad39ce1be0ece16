use std::process::ExitCode;

use blockmodel::cli;
use blockmodel::Error;

fn main() -> ExitCode {
    match cli::run_from(std::env::args_os()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Usage(msg)) if msg.is_empty() => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e))
        }
    }
}
