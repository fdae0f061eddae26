//! CLI-level error type with the exit-code policy: configuration and input
//! problems exit 2, capability violations exit 3.

use bfsk::analysis::AnalysisError;
use bfsk::api::FilterError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Filter(#[from] FilterError),
    #[error("{0}")]
    Analysis(#[from] AnalysisError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("report: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 for anything wrong with the inputs, 3 when a filter was asked for a
    /// capability it does not have.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Filter(FilterError::CapabilityUnsupported(_)) => 3,
            CliError::Analysis(AnalysisError::Filter(FilterError::CapabilityUnsupported(_))) => 3,
            _ => 2,
        }
    }
}

pub fn config_error(message: impl Into<String>) -> CliError {
    CliError::Config(message.into())
}
