use std::process::ExitCode;

use clap::Parser;

use granum::cli;

fn main() -> ExitCode {
    // clap exits with code 2 on usage errors (0 for --help/--version).
    let parsed = cli::Cli::parse();
    match cli::run(parsed) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
