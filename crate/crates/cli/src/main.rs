//! `stredalab` command-line driver: single runs, B sweeps, oracle checks
//! and cache maintenance.

mod cache;
mod commands;
mod config;
mod error;
mod log;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliError;

#[derive(Parser)]
#[command(name = "stredalab", version, about = "Spin Středa numerics")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Three-way Středa check at the config's field; writes report.json.
    Run { config: PathBuf },
    /// One row per field value of the [sweep] grid; writes sweep.csv.
    Sweep { config: PathBuf },
    /// Brute-force operator identities and Fukui–Hatsugai fixtures; writes oracle.json.
    Oracle { config: PathBuf },
    /// Removes cached eigenpairs from a directory (or its cache/ subdirectory).
    CacheClear { dir: PathBuf },
}

fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var("STREDALAB_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Validation(format!("STREDALAB_THREADS: expected a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(None),
    }
}

fn dispatch(verb: Verb) -> Result<(), CliError> {
    stredalab::par::init_threads(threads_from_env()?);
    match verb {
        Verb::Run { config } => commands::run(&config),
        Verb::Sweep { config } => commands::sweep(&config),
        Verb::Oracle { config } => commands::oracle(&config),
        Verb::CacheClear { dir } => commands::cache_clear(&dir),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.verb) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("stredalab: {e}");
            e.exit_code()
        }
    }
}
