use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by any pipeline stage.
///
/// Variants split into validation failures (bad inputs, contract
/// violations) and I/O failures; [`Error::is_io`] distinguishes the two
/// so callers can map them to exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("duplicate rule pattern {pattern:?} (line {line})")]
    DuplicatePattern { pattern: String, line: usize },

    #[error("unknown orthography {0:?} (expected cyrillic, latin1995, latin2009 or latin2016)")]
    UnknownOrthography(String),

    #[error("orthography mismatch: forward is {fwd_src}->{fwd_tgt} but backward is {bwd_src}->{bwd_tgt}")]
    OrthographyMismatch {
        fwd_src: String,
        fwd_tgt: String,
        bwd_src: String,
        bwd_tgt: String,
    },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("zero vector at row {0}; cosine and normalization are undefined")]
    ZeroVector(usize),

    #[error("non-finite value in row {0}")]
    NonFinite(usize),

    #[error("vector file {path} holds {got} rows but {expected} sentences were given")]
    MissingVectors {
        path: PathBuf,
        expected: usize,
        got: usize,
    },

    #[error("invalid embedder spec {0:?}")]
    InvalidEmbedderSpec(String),

    #[error("bad vector file {path}: {message}")]
    VectorFormat { path: PathBuf, message: String },

    #[error("threshold {0} outside [0, 1]")]
    ThresholdRange(f64),

    #[error("line count mismatch: {left} has {left_count} lines, {right} has {right_count}")]
    LineCountMismatch {
        left: PathBuf,
        left_count: usize,
        right: PathBuf,
        right_count: usize,
    },

    #[error("{path}: empty line(s) at {lines:?}")]
    EmptyLines { path: PathBuf, lines: Vec<usize> },

    #[error("unknown language tag {0:?}")]
    UnknownLanguage(String),

    #[error("unknown domain {0:?} (expected news, books, dictionaries, textbooks or other)")]
    UnknownDomain(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("unknown subtoken {subtoken:?} in decomposition of {token:?}")]
    UnknownSubtoken { token: String, subtoken: String },

    #[error("new token {0:?} already exists or is listed twice")]
    DuplicateNewToken(String),

    #[error("token {0:?} has no decomposition")]
    UncoveredToken(String),

    #[error("token {0:?} has an empty decomposition")]
    EmptyDecomposition(String),

    #[error("invalid mix spec: {0}")]
    InvalidMixSpec(String),
}

impl Error {
    /// Attach a path to a raw I/O error.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for filesystem-level failures, false for validation failures.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
