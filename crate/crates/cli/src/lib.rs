//! Library side of the `mrds` binary: argument definitions, the artifact
//! commands and the built-in verification suite.

use std::fmt;
use std::io::Write;

pub mod args;
pub mod commands;
pub mod output;
pub mod verify;

pub use args::{Cli, Command, Common};
pub use output::RunManifest;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_CHECK: u8 = 3;
pub const EXIT_NO_CONVERGENCE: u8 = 4;

/// Unreadable or invalid input outside the config schema itself.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// One or more requested checks did not pass.
#[derive(Debug)]
pub struct CheckFailed(pub String);

impl fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "check failed: {}", self.0)
    }
}

impl std::error::Error for CheckFailed {}

/// Process exit code for an error.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() {
            return EXIT_CONFIG;
        }
        if cause.is::<CheckFailed>() {
            return EXIT_CHECK;
        }
        if let Some(e) = cause.downcast_ref::<mrds::Error>() {
            return match e {
                mrds::Error::Schema(_)
                | mrds::Error::Stochasticity { .. }
                | mrds::Error::Degree { .. }
                | mrds::Error::Weight { .. } => EXIT_CONFIG,
                mrds::Error::NotIrreducible | mrds::Error::DeadEnd { .. } => EXIT_CHECK,
                mrds::Error::NoConvergence(_) => EXIT_NO_CONVERGENCE,
                mrds::Error::RasterMismatch => EXIT_FAILURE,
            };
        }
    }
    EXIT_FAILURE
}

/// Thread count from `MRDS_THREADS` if set, else the flag. Zero means
/// machine parallelism.
pub fn thread_count(flag: usize) -> anyhow::Result<usize> {
    match std::env::var("MRDS_THREADS") {
        Ok(v) => v.trim().parse().map_err(|_| ConfigError(format!("MRDS_THREADS={v:?} is not a count")).into()),
        Err(_) => Ok(flag),
    }
}

/// Runs a parsed command line in the current rayon pool.
pub fn run(cli: &Cli, log: &mut dyn Write) -> anyhow::Result<()> {
    match &cli.command {
        Command::Verify { only } => {
            let outcomes = verify::run_selected(only, log)?;
            let failed: Vec<String> =
                outcomes.iter().filter(|o| !o.passed).map(|o| format!("criterion {}", o.id)).collect();
            if !failed.is_empty() {
                return Err(CheckFailed(failed.join(", ")).into());
            }
            Ok(())
        }
        command => commands::execute(&cli.common, command, log).map(|_| ()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let schema: anyhow::Error = mrds::Error::Stochasticity { vertex: 1, sum: 0.5 }.into();
        assert_eq!(exit_code(&schema.context("parsing x.toml")), EXIT_CONFIG);
        assert_eq!(exit_code(&mrds::Error::NoConvergence("x".into()).into()), EXIT_NO_CONVERGENCE);
        assert_eq!(exit_code(&CheckFailed("kernel".into()).into()), EXIT_CHECK);
        assert_eq!(exit_code(&ConfigError("missing".into()).into()), EXIT_CONFIG);
        assert_eq!(exit_code(&anyhow::anyhow!("io")), EXIT_FAILURE);
    }
}
