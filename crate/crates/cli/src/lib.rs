//! Command-line experiments over `soap-sched-core`: rank dumps, analytic
//! mean response times, simulation, policy comparisons, the approximation
//! ratio curve, the pathological sweep, and the invariant suite.

pub mod commands;
pub mod distspec;
pub mod output;

use std::fmt;

pub use commands::{Cli, Command};

/// Exit status for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit status when an invariant check fails.
pub const EXIT_INVARIANT: i32 = 1;
/// Exit status for bad arguments, specs or I/O.
pub const EXIT_INPUT: i32 = 2;

/// Environment variable capping the worker pool size.
pub const THREADS_ENV: &str = "SOAP_SCHED_THREADS";

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Input(String),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "invalid input: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<soap_sched_core::Error> for CliError {
    fn from(e: soap_sched_core::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        EXIT_INPUT
    }
}

/// Worker pool sized by [`THREADS_ENV`] when set, else by rayon's default.
pub fn worker_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            CliError::Input(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))
        })?;
        b = b.num_threads(n);
    }
    b.build()
        .map_err(|e| CliError::Io(format!("cannot start worker pool: {e}")))
}
