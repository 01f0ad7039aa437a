//! Experiment driver: configuration, runs, and reports comparing exact
//! point counts on quadric cones with their predicted leading constants.

pub mod config;
pub mod experiments;
pub mod identities;
pub mod report;

pub use config::{ExperimentConfig, ExperimentKind};
pub use experiments::run_experiment;
pub use report::Report;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error(transparent)]
    Core(#[from] conecount_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    /// Process exit code: 3 for configuration errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config { .. } => 3,
            _ => 1,
        }
    }
}
