use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("duplicate {kind} id {id}")]
    DuplicateId { kind: &'static str, id: u32 },

    #[error("matching references unknown {kind} id {id}")]
    InvalidReference { kind: &'static str, id: u32 },

    #[error("point ({lat}, {lon}) lies outside the region")]
    OutOfRegion { lat: f64, lon: f64 },

    #[error("c_max must be positive, got {0}")]
    NonPositiveCMax(f64),

    #[error("historical optimum is empty; no threshold can be extracted")]
    EmptyHistory,

    #[error("instance too large for exhaustive search: {workers} workers x {tasks} tasks (limit {limit})")]
    TooLarge {
        workers: usize,
        tasks: usize,
        limit: usize,
    },

    #[error("{path}:{line}: {message}")]
    Row {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the command-line driver: 1 for validation or
    /// assertion failures, 2 for I/O and parse failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::Csv(_) | Error::Json(_) | Error::Row { .. } => 2,
            _ => 1,
        }
    }
}
