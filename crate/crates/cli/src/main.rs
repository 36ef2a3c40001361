//! `isocurse`: reproducible batch experiments on volume-normalized `l_p` balls.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::{CommandFactory, Parser};

use crate::args::{Cli, Command};
use crate::output::CliError;

/// Worker count for the rayon pool. Never changes any result.
const THREADS_ENV: &str = "ISOCURSE_THREADS";

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Numerical(format!("could not start worker pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let (bytes, out) = match &cli.command {
        Command::Geometry(a) => (commands::geometry(a)?, &a.output.out),
        Command::Sample(a) => (commands::sample(a)?, &a.out),
        Command::Concentrate(a) => (commands::concentrate(a)?, &a.output.out),
        Command::Fool(a) => (commands::fool(a)?, &a.output.out),
        Command::CurseReport(a) => (commands::curse_report(a)?, &a.output.out),
    };
    output::emit(&bytes, out.as_deref())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            if e.use_stderr() && !e.render().to_string().contains("Usage:") {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, CliError::Usage(_)) {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            ExitCode::from(e.exit_code())
        }
    }
}
