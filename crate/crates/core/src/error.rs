use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing mandatory field `{0}`")]
    MissingField(&'static str),

    #[error("unparseable date `{0}` (expected YYYY-MM-DD)")]
    BadDate(String),

    #[error("field `{field}`: cannot parse `{value}` as a number")]
    BadNumber { field: &'static str, value: String },

    #[error("field `{field}`: value {value} outside [0, 1]")]
    OutOfRange { field: &'static str, value: f64 },

    #[error("field `{field}`: label must be 0 or 1, got `{value}`")]
    BadLabel { field: &'static str, value: String },

    #[error("header mismatch: expected `{expected}`, found `{found}`")]
    HeaderMismatch { expected: String, found: String },

    #[error("row {row}: {source}")]
    Row {
        row: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{0}")]
    InvalidInput(String),

    #[error("need at least {needed} distinct groups for {needed}-fold split, found {found}")]
    TooFewGroups { needed: usize, found: usize },

    #[error("training set contains a single class")]
    SingleClass,

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at_row(self, row: usize) -> Self {
        Error::Row {
            row,
            source: Box::new(self),
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
