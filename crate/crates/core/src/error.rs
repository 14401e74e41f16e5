use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("no edges")]
    NoEdges,
    #[error("graph has {0} vertices; at most 2^31 - 1 are supported")]
    TooManyVertices(usize),
    #[error("graph not connected; extract LCC first")]
    NotConnected,
    #[error("closeness undefined for n=1")]
    ClosenessUndefined,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("NaN in input at position {0}")]
    NaN(usize),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("degenerate feature: {0}")]
    DegenerateFeature(String),
    #[error("tau undefined")]
    TauUndefined,
    #[error("constant target; R^2 undefined")]
    ConstantTarget,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("schema mismatch: {0}")]
    Schema(String),
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

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
