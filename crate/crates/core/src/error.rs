use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the retrieval pipeline.
#[derive(Debug, Error)]
pub enum HarError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate turn {turn_index} in dialog {dialog_id}")]
    DuplicateTurn { dialog_id: String, turn_index: usize },

    #[error("dialog {dialog_id}: turn indices are not consecutive from 1 (found {found}, expected {expected})")]
    NonConsecutiveTurns {
        dialog_id: String,
        found: usize,
        expected: usize,
    },

    #[error("duplicate passage id {0}")]
    DuplicatePid(String),

    #[error("passage {0} has empty text")]
    EmptyPassage(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("turn {k} out of range for dialog {dialog_id} with {len} turns")]
    TurnOutOfRange {
        dialog_id: String,
        k: usize,
        len: usize,
    },

    #[error("{what} id {id} out of range (size {size})")]
    IdOutOfRange {
        what: &'static str,
        id: usize,
        size: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("current question has no active tokens")]
    NoActiveTokens,

    #[error("empty gold set for query {0}")]
    EmptyGold(String),

    #[error("gold passage {pid} for query {qid} is not in the collection")]
    MissingGold { qid: String, pid: String },

    #[error("fingerprint mismatch: expected {expected}, found {found}")]
    FingerprintMismatch { expected: String, found: String },

    #[error("bad vector store file: {0}")]
    BadStore(String),

    #[error("training diverged at step {step}: loss is {loss}")]
    Diverged { step: usize, loss: f64 },

    #[error("{0} already exists (pass --force to overwrite)")]
    AlreadyExists(PathBuf),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = HarError> = std::result::Result<T, E>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> HarError {
    let path = path.into();
    move |source| HarError::Io { path, source }
}
