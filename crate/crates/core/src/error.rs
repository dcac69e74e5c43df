use chrono::NaiveDate;
use thiserror::Error;

/// Errors produced anywhere in the ingest → solve → indicator pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("line {line}, column {column} ({asset}): {message}")]
    Cell {
        line: u64,
        column: usize,
        asset: String,
        message: String,
    },

    #[error("line {line}: {message}")]
    Row { line: u64, message: String },

    #[error("line {line}: dates not strictly increasing ({date} follows {previous})")]
    DatesNotIncreasing {
        line: u64,
        date: NaiveDate,
        previous: NaiveDate,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("invalid panel: {0}")]
    InvalidPanel(String),

    #[error("insufficient history: need {required} rows, have {available}")]
    InsufficientHistory { required: usize, available: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("budget violation: L1 norm of weights is {l1_norm}, expected 1")]
    BudgetViolation { l1_norm: f64 },

    #[error("lambda {0} outside [0, 1]")]
    InvalidLambda(f64),

    #[error("covariance is not symmetric: |C[{row}][{col}] - C[{col}][{row}]| = {gap:e}")]
    NotSymmetric { row: usize, col: usize, gap: f64 },

    #[error(
        "covariance is not positive semidefinite (eigenvalue {eigenvalue:e}, largest {largest:e})"
    )]
    NotPositiveSemidefinite { eigenvalue: f64, largest: f64 },

    #[error("{assets} assets exceeds the {limit}-asset limit of this solver")]
    AssetLimitExceeded { assets: usize, limit: usize },

    #[error("simplex QP did not reach a KKT point within {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid lambda grid: {0}")]
    InvalidGrid(String),

    #[error("at lambda = {lambda}: {source}")]
    AtLambda {
        lambda: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("window ending {date}: {source}")]
    AtDate {
        date: NaiveDate,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
