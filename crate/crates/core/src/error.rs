use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("invalid control vector: {0}")]
    InvalidVector(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The region average or the brightness target leaves the open unit
    /// interval, so no finite positive exponent exists.
    #[error("degenerate exposure: {0}")]
    DegenerateExposure(String),

    #[error("valence/arousal border case: valence={valence}, arousal={arousal}")]
    BorderCase { valence: f64, arousal: f64 },

    #[error("unknown emotion `{0}`")]
    UnknownEmotion(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error("malformed image file {path}: {reason}")]
    Malformed { path: PathBuf, reason: String },

    #[error("malformed record on line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
