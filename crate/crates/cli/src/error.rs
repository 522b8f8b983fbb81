use std::path::{Path, PathBuf};

use thiserror::Error;

/// Problems with the files or settings handed to the tool (exit code 1).
#[derive(Debug, Error)]
pub enum InputError {
    #[error("config: {0}")]
    Config(String),
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("manifest: mass required (row {row})")]
    MissingMass { row: usize },
    #[error("manifest row {row}: file not found: {}", path.display())]
    MissingFile { row: usize, path: PathBuf },
    #[error("{}: schema: {msg}", path.display())]
    Schema { path: PathBuf, msg: String },
    #[error("{}: timestamps not strictly increasing at data row {row}", path.display())]
    NonMonotoneTime { path: PathBuf, row: usize },
    #[error("{}: sample period {found} s does not match the expected {expected} s", path.display())]
    RateMismatch { path: PathBuf, found: f64, expected: f64 },
    #[error("{trial}: CoM has {com} samples but GRF gives {grf} after downsampling (tolerance {tolerance})")]
    LengthMismatch { trial: String, com: usize, grf: usize, tolerance: usize },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl InputError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.to_path_buf(), source }
    }

    pub fn schema(path: &Path, msg: impl Into<String>) -> Self {
        Self::Schema { path: path.to_path_buf(), msg: msg.into() }
    }
}
