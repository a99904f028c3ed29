use std::path::PathBuf;

use thiserror::Error;

use crate::rfs::TrackLabel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Every particle weight is zero, so the cloud cannot be normalized.
    #[error("all particle weights are zero")]
    AllZeroWeights,

    #[error("invalid particle cloud: {0}")]
    InvalidCloud(String),

    #[error("label {0} already present in the density")]
    LabelCollision(TrackLabel),

    #[error("particle clouds for label {label} differ: {reason}")]
    ParticleMismatch { label: TrackLabel, reason: String },

    /// All fused particle weights underflowed; the local supports are disjoint.
    #[error("fused particle weights for label {0} vanished")]
    DegenerateFusion(TrackLabel),

    #[error("local posterior {sensor} does not carry the prior's label set")]
    LabelSetMismatch { sensor: usize },

    #[error("invalid config at `{field}`: {message}")]
    ConfigInvalid { field: String, message: String },

    #[error("result directories differ in shape: {0}")]
    ShapeMismatch(String),

    #[error("run {run} failed at step {step}: {source}")]
    RunFailed {
        run: usize,
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::ConfigInvalid {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::AllZeroWeights => "AllZeroWeights",
            Error::InvalidCloud(_) => "InvalidCloud",
            Error::LabelCollision(_) => "LabelCollision",
            Error::ParticleMismatch { .. } => "ParticleMismatch",
            Error::DegenerateFusion(_) => "DegenerateFusion",
            Error::LabelSetMismatch { .. } => "LabelSetMismatch",
            Error::ConfigInvalid { .. } => "ConfigInvalid",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::RunFailed { .. } => "RunFailed",
            Error::Io { .. } => "Io",
            Error::Csv(_) => "Csv",
        }
    }
}
