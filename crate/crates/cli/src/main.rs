use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    // clap's own usage errors exit with 2, matching the configuration code
    let cli = semitoric_cli::Cli::parse();
    ExitCode::from(semitoric_cli::run(cli))
}
