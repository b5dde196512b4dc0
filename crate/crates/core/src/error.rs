use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("value {value} outside [0, 1] ({context})")]
    OutOfUnitInterval { value: f64, context: &'static str },

    #[error("probability level {0} outside (0, 1]")]
    InvalidLevel(f64),

    #[error("atom weights must be positive and sum to 1 (got total {0})")]
    InvalidWeights(f64),

    #[error("map undefined at atom location {0}")]
    UndefinedMap(f64),

    #[error("item sets differ: {0}")]
    ItemMismatch(String),

    #[error("dimension mismatch: {0}")]
    Shape(String),

    #[error("not a permutation of 1..={len}: {detail}")]
    NotPermutation { len: usize, detail: String },

    #[error("need at least {required} items, got {got}")]
    TooFewItems { required: usize, got: usize },

    #[error("zero variance: {0}")]
    ZeroVariance(&'static str),

    #[error("duplicate rating for user {user:?} and item {item:?} (rows {first_row} and {second_row})")]
    DuplicatePair {
        user: String,
        item: String,
        first_row: usize,
        second_row: usize,
    },

    #[error("{path}: row {row}, column {column}: {message}")]
    Parse {
        path: String,
        row: usize,
        column: String,
        message: String,
    },

    #[error("rating {value} outside scale [{min}, {max}] at row {row}")]
    OutOfScale {
        value: f64,
        min: f64,
        max: f64,
        row: usize,
    },

    #[error("invalid scale: min {min} must be below max {max}")]
    InvalidScale { min: f64, max: f64 },

    #[error("no data left after filtering (min user ratings {min_user}, min item ratings {min_item})")]
    EmptyAfterFilter { min_user: usize, min_item: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no eligible pairs: {0}")]
    NoEligiblePairs(&'static str),

    #[error("top-k {k} exceeds item count {items}")]
    TopKTooLarge { k: usize, items: usize },

    #[error("output directory {0} already contains results (pass --force to overwrite)")]
    OutputExists(PathBuf),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}
