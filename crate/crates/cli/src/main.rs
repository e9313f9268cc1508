use std::process::ExitCode;

use clap::Parser;
use curvb_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("curvb: check failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("curvb: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
