use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("raster data length {got} does not match {width}x{height}")]
    RasterLength { width: usize, height: usize, got: usize },

    #[error("raster dimensions must be non-zero, got {width}x{height}")]
    EmptyRaster { width: usize, height: usize },

    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("degenerate clip: depth range needs two distinct values ({0})")]
    DegenerateClip(String),

    #[error("empty region of interest")]
    EmptyRoi,

    #[error("region of interest too small: {0}")]
    RoiTooSmall(String),

    #[error("feature dimension mismatch: expected {expected}, got {got}")]
    FeatureDimension { expected: usize, got: usize },

    #[error("invalid scheme set: {0}")]
    Scheme(String),

    #[error("invalid training data: {0}")]
    Training(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed PGM {path}: {reason}")]
    Pgm { path: PathBuf, reason: String },

    #[error("invalid dataset: {0}")]
    Dataset(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
