use std::path::PathBuf;

use thiserror::Error;

use crate::scenario_file::Diagnostics;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Scenario(#[from] Diagnostics),
    #[error(transparent)]
    Core(#[from] angleform_core::Error),
    #[error("writing csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("writing json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("acceptance checks failed: {}", .0.join(", "))]
    ChecksFailed(Vec<String>),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}
