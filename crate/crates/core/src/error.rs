use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("header row is missing")]
    MissingHeader,

    #[error("fewer than 3 rows (got {0})")]
    TooFewRows(usize),

    #[error("table has no value columns")]
    NoColumns,

    #[error("row {row} has {found} cells, expected {expected}")]
    RaggedRow {
        row: usize,
        found: usize,
        expected: usize,
    },

    #[error("non-numeric cell {value:?} at row {row}, column {column}")]
    NonNumeric {
        row: usize,
        column: usize,
        value: String,
    },

    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("duplicate {axis} label {label:?}")]
    DuplicateLabel { axis: &'static str, label: String },

    #[error("column {0:?} is constant")]
    ConstantColumn(String),

    #[error("k out of range: k = {k}, must satisfy 2 <= k <= {max}")]
    KOutOfRange { k: usize, max: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("graph is disconnected: component {first:?} is not connected to component {second:?}")]
    Disconnected {
        first: Vec<String>,
        second: Vec<String>,
    },

    #[error("degenerate variance for variable {0:?}")]
    DegenerateVariance(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("complex is not closed: face {face:?} of simplex {simplex:?} is missing or born later")]
    ClosureViolation { simplex: Vec<usize>, face: Vec<usize> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
