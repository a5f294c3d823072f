use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("matrix must have at least one row and one column")]
    Empty,

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("solver input must have cols >= rows, got {rows}x{cols}")]
    TallInput { rows: usize, cols: usize },

    #[error("reference matrix has zero Frobenius norm")]
    ZeroNorm,

    #[error("observed matrix is all zeros")]
    ZeroData,

    #[error("matrix has numerical rank {found}, need at least {needed}")]
    RankDeficient { needed: usize, found: usize },

    #[error("column covariance for column {column} is not positive definite")]
    SingularCovariance { column: usize },

    #[error("column {column} has no observed entries")]
    UnobservedColumn { column: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
