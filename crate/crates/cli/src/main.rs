mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::Failure;

fn run() -> Result<(), Failure> {
    let argv = args::expand_config(std::env::args_os().collect()).map_err(Failure::Usage)?;
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let echo = provenance(&argv);
    match &cli.command {
        Command::Fidelity(a) => commands::fidelity(a, &echo),
        Command::Sweep(a) => commands::sweep(a, &echo),
        Command::Compare(a) => commands::compare(a, &echo, false),
        Command::Tmax(a) => commands::compare(a, &echo, true),
        Command::Ordering(a) => commands::ordering(a, &echo),
        Command::OracleCheck(a) => commands::oracle_check(a, &echo),
    }
}

/// Arguments echoed into JSON output. Worker count and output path do not
/// affect results and are left out so that such runs stay byte-identical.
fn provenance(argv: &[std::ffi::OsString]) -> Vec<String> {
    let mut echo = Vec::new();
    let mut skip_value = false;
    for arg in argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()) {
        if std::mem::take(&mut skip_value) {
            continue;
        }
        if arg == "--workers" || arg == "--output" {
            skip_value = true;
        } else if !(arg.starts_with("--workers=") || arg.starts_with("--output=")) {
            echo.push(arg);
        }
    }
    echo
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.exit_code())
        }
    }
}
