//! `qru` command-line harness: data generation, training runs, sweeps,
//! variability studies, hyperparameter search and circuit diagnostics.
//!
//! Every command writes its outputs plus a `<out>.manifest.json` provenance
//! record. CSV bodies carry no timestamps or timings, so re-running a
//! command with the same inputs reproduces them byte for byte.

mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod output;
pub mod pipeline;

use std::ffi::OsString;

use clap::Parser;

pub use commands::Cli;
pub use error::{CliError, CliResult};

/// Parses `args` (program name first), runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match commands::execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("qru: {e}");
            e.exit_code()
        }
    }
}
