use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: self-loop on vertex {label}")]
    SelfLoop { line: usize, label: i64 },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("vertex {0} is out of range")]
    InvalidVertex(usize),

    #[error("no vertex with label {0}")]
    UnknownLabel(i64),

    #[error("vertex {0} is isolated")]
    IsolatedVertex(usize),

    #[error("graph is not connected")]
    Disconnected,

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    Asymmetric(f64),

    #[error("linear system is singular")]
    Singular,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by numerics or degenerate scores rather than
    /// by malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Singular | Error::Degenerate(_) | Error::Asymmetric(_))
    }
}
