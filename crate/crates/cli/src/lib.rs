//! Command-line orchestration for `carnot-core`: configuration files, solve
//! runs with CSV and manifest artifacts, verification suites and parameter
//! sweeps.

use std::fmt;

pub mod config;
pub mod output;
pub mod solve;
pub mod sweep;
pub mod verify;

pub use config::{Problem, RunConfig};
pub use solve::{run_solve, SolveOutcome};
pub use sweep::{run_sweep, SweepParam};

/// Invalid configuration. The binary maps it to exit code 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Exit code for an error returned by the library.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<ConfigError>().is_some() {
        2
    } else {
        1
    }
}
