//! Error type for experiment orchestration.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("rate fit: {0}")]
    Fit(String),
    #[error(transparent)]
    Core(#[from] longwave_core::CoreError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;
