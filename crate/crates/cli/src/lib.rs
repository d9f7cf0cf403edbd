//! Scenario runner: one subcommand per experiment, one output directory per run.

pub mod commands;
pub mod config;
pub mod record;

use std::path::PathBuf;

pub use config::ScenarioConfig;
pub use record::{Check, Metric, RunRecord};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const IO: i32 = 1;
    pub const VALIDATION: i32 = 2;
    pub const NON_CONVERGENCE: i32 = 3;
    pub const THRESHOLD: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] gravloc_core::Error),
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use gravloc_core::Error as E;
        match self {
            CliError::Validation(_) => exit::VALIDATION,
            CliError::Output { .. } => exit::IO,
            CliError::Core(e) => match e {
                E::NonConvergence { .. } | E::Bracketing { .. } => exit::NON_CONVERGENCE,
                E::ThresholdBreach { .. } => exit::THRESHOLD,
                E::Io(_) => exit::IO,
                E::Domain(_)
                | E::DegenerateInput(_)
                | E::GridMismatch(_)
                | E::NoGroundState(_)
                | E::Precondition(_)
                | E::NonFinite(_)
                | E::Format(_) => exit::VALIDATION,
            },
        }
    }

    /// Machine-readable error kind for the structured error report.
    pub fn kind(&self) -> &'static str {
        use gravloc_core::Error as E;
        match self {
            CliError::Validation(_) => "validation",
            CliError::Output { .. } => "io",
            CliError::Core(e) => match e {
                E::NoGroundState(_) => "no_ground_state",
                E::NonConvergence { .. } => "non_convergence",
                E::Bracketing { .. } => "bracketing",
                E::ThresholdBreach { .. } => "threshold_breach",
                E::Precondition(_) => "precondition",
                E::NonFinite(_) => "non_finite",
                E::Io(_) => "io",
                _ => "domain",
            },
        }
    }
}

/// Exit code for a finished run: breach of any acceptance check gives 4.
pub fn exit_code_for(record: &RunRecord) -> i32 {
    if record.checks.iter().all(|c| c.pass) {
        exit::SUCCESS
    } else {
        exit::THRESHOLD
    }
}
