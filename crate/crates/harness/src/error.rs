use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] dude_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parse error at byte {offset}: {msg}")]
    Parse { offset: usize, msg: String },
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("record for config {0} has no true loss")]
    MissingTrueLoss(String),
    #[error("no records to select from")]
    NoRecords,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|source| HarnessError::Io { path: path.to_owned(), source })
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| HarnessError::Io { path: path.to_owned(), source })
}

pub(crate) fn parse_err(offset: usize, msg: impl Into<String>) -> HarnessError {
    HarnessError::Parse { offset, msg: msg.into() }
}
