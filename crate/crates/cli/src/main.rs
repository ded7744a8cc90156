use std::process::ExitCode;

use clap::error::ErrorKind;
use hardyops_cli::{parse_config, run, CliError, EXIT_ERROR};

fn main() -> ExitCode {
    let cfg = match parse_config(std::env::args_os()) {
        Ok(c) => c,
        Err(CliError::Usage(e))
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) =>
        {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_ERROR);
        }
    };
    match run(&cfg) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
