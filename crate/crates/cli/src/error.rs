use std::process::ExitCode;

use pileup_core::compare::CompareError;
use pileup_core::continuum::ContinuumError;
use pileup_core::discrete::DiscreteError;
use pileup_core::scaling::ScalingError;
use thiserror::Error;

/// Failures tagged with the stage that produced them.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {path}: {message}")]
    Config { path: String, message: String },
    #[error("classify: {0}")]
    Classify(#[from] ScalingError),
    #[error("discrete: {0}")]
    Discrete(#[from] DiscreteError),
    #[error("continuum: {0}")]
    Continuum(#[from] ContinuumError),
    #[error("compare: {0}")]
    Compare(#[from] CompareError),
    #[error("sweep instance {index}: {source}")]
    Sweep {
        index: usize,
        #[source]
        source: Box<CliError>,
    },
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
    #[error("output: {0}")]
    Csv(#[from] csv::Error),
    #[error("output: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config { .. } => ExitCode::from(2),
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => ExitCode::from(4),
            CliError::Sweep { source, .. } => source.exit_code(),
            _ => ExitCode::from(3),
        }
    }
}
