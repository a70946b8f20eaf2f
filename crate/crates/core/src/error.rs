use thiserror::Error;

use crate::ObjectId;

pub type Result<T, E = SdcError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum SdcError {
    #[error("empty dataset")]
    EmptyDataset,

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("row {row} has {found} columns, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("object {0} has no observed values")]
    AllMissing(ObjectId),

    #[error("non-finite value at object {object}, dimension {dim}")]
    NonFinite { object: ObjectId, dim: usize },

    #[error("label column {0:?} not found")]
    UnknownLabelColumn(String),

    #[error("dimension index {dim} out of range (dataset has {dim_count})")]
    DimensionOutOfRange { dim: usize, dim_count: usize },

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("query index {index} out of range for {len} points")]
    QueryOutOfRange { index: usize, len: usize },

    #[error("missing rate {0} outside [0, 1)")]
    InvalidRate(f64),

    #[error("invalid thresholds: {0}")]
    InvalidThresholds(String),

    #[error("label sets differ: {0}")]
    LabelMismatch(String),

    #[error("the run has already finished")]
    RunFinished,

    #[error("threshold provider aborted: {0}")]
    Aborted(String),

    #[error("inconsistent partition: {0}")]
    InvalidPartition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl SdcError {
    /// True for errors caused by a structurally unusable dataset rather than
    /// malformed input or IO.
    pub fn is_degenerate_dataset(&self) -> bool {
        matches!(
            self,
            SdcError::EmptyDataset | SdcError::AllMissing(_) | SdcError::TooFewPoints { .. }
        )
    }
}
