use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("graph is disconnected (node {0} unreachable from node 0)")]
    Disconnected(usize),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("band [{lo}, {hi}] Hz contains no Fourier frequency")]
    EmptyBand { lo: f64, hi: f64 },

    #[error("invalid distance matrix: {0}")]
    InvalidMatrix(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("invalid config field `{field}`: {msg}")]
    Config { field: &'static str, msg: String },

    #[error("job (snr={snr}, replicate={replicate}) failed: {source}")]
    Job {
        snr: f64,
        replicate: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
