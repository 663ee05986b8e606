use thiserror::Error;

/// Crate-wide error type. Message text for the data-shape variants is part of
/// the public behavior: callers (and the CLI) surface these verbatim.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite data")]
    NonFinite,

    #[error("dimension mismatch: {context} has length {actual}, expected {expected}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("too few observations for CV folds ({n} rows, {folds} folds)")]
    TooFewObservations { n: usize, folds: usize },

    #[error("singular design; supply ridge_eps")]
    SingularDesign,

    #[error("degenerate residual variance for feature {feature}")]
    DegenerateResidualVariance { feature: usize },

    #[error("unknown group key: {0}")]
    UnknownGroupKey(String),

    #[error("duplicate column name: {0}")]
    DuplicateColumnName(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
