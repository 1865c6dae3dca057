use thiserror::Error;

/// Errors raised by grid construction, estimation and the extractors.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid is not symmetric about center {center}")]
    AsymmetricGrid { center: f64 },
    #[error("empty sample")]
    EmptySample,
    #[error("sample value {value} lies below the support bound {bound}")]
    BelowSupport { value: f64, bound: f64 },
    #[error("degenerate sample: all values are equal")]
    DegenerateSample,
    #[error("invalid mixture specification: {0}")]
    InvalidMixture(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("density is zero everywhere on the grid")]
    ZeroDensity,
    #[error("solver failure: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;
