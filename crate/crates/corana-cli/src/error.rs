//! Pipeline errors carry the stage that failed and map onto exit codes:
//! 1 for input/config problems, 2 for numeric failures.

use corana::ca::CaError;
use corana::seqclust::ClusterError;
use corana::stylometrics::StyleError;
use corana::tabulate::TableError;
use thiserror::Error;

#[derive(Debug, Error)]
#[error("{stage}: {message}")]
pub struct CliError {
    pub stage: &'static str,
    pub message: String,
    pub numeric: bool,
}

impl CliError {
    pub fn input(stage: &'static str, message: impl ToString) -> Self {
        CliError {
            stage,
            message: message.to_string(),
            numeric: false,
        }
    }

    pub fn numeric(stage: &'static str, message: impl ToString) -> Self {
        CliError {
            stage,
            message: message.to_string(),
            numeric: true,
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.numeric {
            2
        } else {
            1
        }
    }

    /// Machine-readable rendering for `--error-json`.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "stage": self.stage,
            "error": self.message,
            "code": self.exit_code(),
        })
        .to_string()
    }

    pub fn from_table(stage: &'static str, err: TableError) -> Self {
        CliError::input(stage, err)
    }

    pub fn from_ca(stage: &'static str, err: CaError) -> Self {
        match err {
            CaError::DecompositionFailure | CaError::OriginPoint => CliError::numeric(stage, err),
            CaError::DimensionMismatch { .. } => CliError::input(stage, err),
        }
    }

    pub fn from_cluster(stage: &'static str, err: ClusterError) -> Self {
        CliError::input(stage, err)
    }

    pub fn from_style(stage: &'static str, err: StyleError) -> Self {
        CliError::input(stage, err)
    }

    pub fn from_io(stage: &'static str, err: std::io::Error) -> Self {
        CliError::input(stage, err)
    }
}
