//! Command-line front end for the go/no-go pipeline.
//!
//! Every subcommand reads its inputs, computes everything in memory and only
//! then writes its files, so a failed run leaves no half-written outputs.
//! The one exception is `vqe`, which keeps the steps logged before a
//! divergence as `trajectory.csv.partial`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod io;

use std::fmt;

pub use args::Cli;

/// Failure classes, mapped onto process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or unreadable input: exit 2.
    Usage(String),
    /// A computation failed or diverged: exit 1.
    Compute(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn compute(msg: impl Into<String>) -> Self {
        CliError::Compute(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Compute(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<gonogo_core::Error> for CliError {
    fn from(e: gonogo_core::Error) -> Self {
        use gonogo_core::Error as E;
        match e {
            E::Parse { .. }
            | E::InvalidInput(_)
            | E::OpenShell(_)
            | E::InvalidConvention(_)
            | E::TooManyQubits { .. }
            | E::WordTooWide { .. }
            | E::QubitMismatch { .. }
            | E::QubitOutOfRange { .. }
            | E::DegenerateGeometry(..)
            | E::Undefined(_) => CliError::Usage(e.to_string()),
            _ => CliError::Compute(e.to_string()),
        }
    }
}

/// Runs one parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    commands::run(cli)
}
