use std::path::PathBuf;

/// Errors raised anywhere in the simulation, dataset or learning pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("unknown attack mode `{0}`")]
    UnknownMode(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("simulation diverged at t = {time:.6} s: {detail}")]
    Diverged { time: f64, detail: String },

    #[error("missing {path}; run `{command}` first")]
    MissingArtifact { path: PathBuf, command: String },

    #[error("model format error at line {line}: {detail}")]
    ModelFormat { line: usize, detail: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
