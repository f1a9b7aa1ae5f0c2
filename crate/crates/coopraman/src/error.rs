//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Scenario or calibration input failed validation.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A frequency band was requested that the attenuation table does not cover.
    #[error("unknown frequency band: {0}")]
    UnknownBand(String),

    /// No finite power allocation or estimate exists for this sub-band.
    #[error("sub-band {index} unreachable: expected channel gain or allocated power is zero")]
    SubbandUnreachable { index: usize },

    /// Inputs whose shapes must agree did not.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A sweep referenced a parameter that is not a scenario field.
    #[error("unknown sweep parameter `{0}`")]
    SweepParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
