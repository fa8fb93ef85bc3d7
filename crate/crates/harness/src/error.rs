use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::snapshot::SnapshotError;

pub type Result<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Snapshot(#[from] SnapshotError),

    #[error(transparent)]
    Core(#[from] phototaxis_core::Error),

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    #[error("no calibration at {0}; run `phototaxis calibrate` first or pass --calibration")]
    MissingCalibration(PathBuf),

    #[error("malformed calibration file {path}: {message}")]
    BadCalibration { path: PathBuf, message: String },

    /// The passive dispersion never became diffusive; `series` holds the
    /// offending replica's `(t, msd)` samples.
    #[error("calibration failed: {message}")]
    Calibration { message: String, series: Vec<(f64, f64)> },

    #[error("theory needs {0}; pass it as a flag or provide a calibration file")]
    MissingTheoryInput(&'static str),
}

impl HarnessError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
