//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("header mismatch: expected {expected:?}, found {found:?}")]
    HeaderMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },

    #[error("row {row}, column {column:?}: cannot parse {value:?} as a number")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },

    #[error("row {row}, column {column:?}: {value} is not a valid {kind} code")]
    InvalidCode {
        row: usize,
        column: String,
        value: f64,
        kind: String,
    },

    #[error("unknown variable {0:?}")]
    UnknownVariable(String),

    #[error("duplicate variable {0:?}")]
    DuplicateVariable(String),

    #[error("column {column:?} has {len} values but the dataset has {n_rows} rows")]
    ColumnLength {
        column: String,
        len: usize,
        n_rows: usize,
    },

    #[error("invalid variable kind: {0}")]
    Kind(String),

    #[error("invalid formula: {0}")]
    Formula(String),

    #[error("design is rank deficient: column {column:?} is linearly dependent")]
    RankDeficient { column: String },

    #[error("{rows} rows is too few to fit {params} parameters")]
    TooFewRows { rows: usize, params: usize },

    #[error("fit did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("separation detected for {variable:?} with predictors {predictors:?}")]
    Separation {
        variable: String,
        predictors: Vec<String>,
    },

    #[error("level {level} of {variable:?} has no observed cases")]
    UnobservedLevel { variable: String, level: i64 },

    #[error("threshold-ordering redraws exhausted after {attempts} attempts")]
    RedrawExhausted { attempts: usize },

    #[error("null log-likelihood is zero: constant response")]
    DegenerateNull,

    #[error("variable {0:?} has no observed values")]
    FullyMissing(String),

    #[error("variable {0:?} already has missing values")]
    AlreadyMissing(String),

    #[error("selection calibration failed: {0}")]
    Calibration(String),

    #[error("invalid specification: {0}")]
    Spec(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("imputation {index} failed: {source}")]
    Chain {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("replication {index} failed: {source}")]
    Replication {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}
