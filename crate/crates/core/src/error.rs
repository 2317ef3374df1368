//! Error type shared across the library.

use thiserror::Error;

/// Errors raised by loaders, decompositions, and analyses.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("row count mismatch: header declared {expected} rows, found {found}")]
    RowCountMismatch { expected: usize, found: usize },

    #[error("duplicate word: {0}")]
    DuplicateWord(String),

    #[error("non-finite value in row for word '{0}'")]
    NonFiniteValue(String),

    #[error("negative count for word '{word}': {value}")]
    NegativeCount { word: String, value: i64 },

    #[error("zero-norm row for word '{0}'")]
    ZeroNormRow(String),

    #[error("missing frequency entry for word '{0}' in strict mode")]
    MissingFrequency(String),

    #[error("bad magic bytes: not a cache file")]
    CacheMagic,

    #[error("unsupported cache version: found {found}, expected {expected}")]
    CacheVersion { found: u8, expected: u8 },

    #[error("wrong cache payload kind: found {found}, expected {expected}")]
    CacheKind { found: u8, expected: u8 },

    #[error("unexpected end of cache")]
    UnexpectedEndOfCache,

    #[error("trailing bytes after cache payload")]
    TrailingCacheBytes,

    #[error("dimension mismatch: expected {expected} columns, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("axis {axis} out of range for {d} axes")]
    AxisOutOfRange { axis: usize, d: usize },

    #[error("input is not whitened: {0}")]
    NotWhitened(String),

    #[error("empty intruder pool for axis {axis}; increase the quantile fractions")]
    EmptyIntruderPool { axis: usize },

    #[error("degenerate top-word distances on axis {axis}: IntraDist is zero")]
    DegenerateDistances { axis: usize },

    #[error("duplicate node {0} in graph node set")]
    DuplicateNode(usize),

    #[error("node {0} not present in tree")]
    NodeNotInTree(usize),

    #[error("cluster {0} is empty")]
    EmptyCluster(usize),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("correlation undefined: {0} input is constant")]
    ConstantInput(&'static str),

    #[error("fewer than 2 usable word pairs ({usable} in vocabulary, {skipped} skipped)")]
    TooFewPairs { usable: usize, skipped: usize },

    #[error("singular matrix: {0}")]
    SingularMatrix(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
