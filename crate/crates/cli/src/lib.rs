//! Command-line driver: solve, analyze and verify.

pub mod analysis;
pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod verify;

use config::{Command, Flags, RunConfig};
use error::CliError;
use report::Report;

pub fn dispatch(command: Command, flags: Flags) -> Result<Report, CliError> {
    let cfg = RunConfig::resolve(command, flags)?;
    let report = match cfg.command {
        Command::Solve => commands::cmd_solve(&cfg),
        Command::Singular => commands::cmd_singular(&cfg),
        Command::Partial => commands::cmd_partial(&cfg),
        Command::Verify => commands::cmd_verify(&cfg),
    }?;
    if !report.all_passed() {
        return Err(CliError::Verification(report.failed()));
    }
    Ok(report)
}

/// Caps the global thread pool at `OT_THREADS` if it is set.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("OT_THREADS") else {
        return Ok(());
    };
    let k: usize = v
        .parse()
        .ok()
        .filter(|&k| k >= 1)
        .ok_or_else(|| CliError::Input(format!("OT_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(k)
        .build_global()
        .map_err(|e| CliError::Input(e.to_string()))
}
