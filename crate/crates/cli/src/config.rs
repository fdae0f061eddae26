//! Run configuration: one self-describing JSON document naming the filter,
//! the workload, and the report destination. Unknown keys are rejected
//! wherever the representation allows it (the filter block is dispatched on
//! its `variant` tag).

use std::path::{Path, PathBuf};

use bfsk::api::params::FilterDescriptor;
use serde::Deserialize;

use crate::error::{config_error, CliError};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Variant tag, structural parameters, and construction seed.
    pub filter: FilterDescriptor,
    pub workload: Workload,
    #[serde(default)]
    pub output: Output,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Workload {
    /// Distinct items inserted before anything is measured.
    pub insertions: usize,
    /// Non-member probes used to measure the false-positive rate.
    pub probes: u64,
    /// Items removed again after insertion (the first `removals` of the
    /// stream). Requires the deletion capability.
    #[serde(default)]
    pub removals: usize,
    /// Seed for the insertion stream and the probe labels, so any report row
    /// can be reproduced from the config alone.
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    #[serde(default)]
    pub format: ReportFormat,
    /// Report file; stdout when absent.
    pub path: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        let config: RunConfig = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.workload.insertions == 0 {
            return Err(config_error("workload.insertions must be positive"));
        }
        if self.workload.removals > self.workload.insertions {
            return Err(config_error(
                "workload.removals cannot exceed workload.insertions",
            ));
        }
        Ok(())
    }
}
