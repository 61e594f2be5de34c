//! Command-layer errors, split by exit code: 2 usage, 3 data, 4 model
//! invariant.

use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl AppError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            AppError::Usage(_) => ExitCode::from(2),
            AppError::Data(_) => ExitCode::from(3),
            AppError::Invariant(_) => ExitCode::from(4),
        }
    }

    pub fn data(err: impl std::fmt::Display) -> Self {
        AppError::Data(err.to_string())
    }
}

impl From<std::io::Error> for AppError {
    fn from(err: std::io::Error) -> Self {
        AppError::Data(err.to_string())
    }
}

impl From<serde_json::Error> for AppError {
    fn from(err: serde_json::Error) -> Self {
        AppError::Data(err.to_string())
    }
}

impl From<blobaudit_core::auction::AuctionError> for AppError {
    fn from(err: blobaudit_core::auction::AuctionError) -> Self {
        AppError::Invariant(err.to_string())
    }
}

impl From<blobaudit_core::dataset::DatasetError> for AppError {
    fn from(err: blobaudit_core::dataset::DatasetError) -> Self {
        AppError::Data(err.to_string())
    }
}
