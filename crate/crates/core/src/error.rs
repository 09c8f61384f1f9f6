use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid rectangle [{min_x}, {min_y}, {max_x}, {max_y}]")]
    InvalidRect {
        min_x: f64,
        min_y: f64,
        max_x: f64,
        max_y: f64,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("statistics requested on an empty tree")]
    EmptyTree,

    #[error("sector cannot be represented as a bounded affine dual segment")]
    NoAffineSegment,

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("line {line}: field `{field}` is not finite")]
    Range { line: u64, field: &'static str },

    #[error("invalid sector at row {row} (line {line})")]
    Row {
        row: usize,
        line: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures that originate in reading or writing files.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io(_) => true,
            Error::Csv(e) => matches!(e.kind(), csv::ErrorKind::Io(_)),
            _ => false,
        }
    }
}
