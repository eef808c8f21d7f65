use thiserror::Error;

/// Errors raised anywhere in the compile / solve / oracle pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("no nodes")]
    NoNodes,
    #[error("cycle detected involving node `{0}`")]
    Cycle(String),
    #[error("duplicate node id `{0}`")]
    DuplicateId(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
    #[error("unsupported structure: {0}")]
    Unsupported(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("invalid distribution: {0}")]
    Distribution(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("truncation error {error:.3e} exceeds delta {delta:.3e}; increase delta")]
    TruncationExceedsDelta { error: f64, delta: f64 },
    #[error("sdpa format: {0}")]
    Sdpa(String),
    #[error("inconsistent variable table: {0}")]
    InconsistentTable(String),
    #[error("{0}")]
    Json(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn from_json(err: serde_json::Error) -> Self {
        match err.classify() {
            serde_json::error::Category::Io => Error::Json(err.to_string()),
            _ => Error::Syntax {
                line: err.line(),
                column: err.column(),
                message: err.to_string(),
            },
        }
    }
}
