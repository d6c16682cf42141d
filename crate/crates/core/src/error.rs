use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A metric parameter was not strictly positive.
    #[error("metric parameters must be strictly positive, got ({0}, {1}, {2})")]
    NonPositiveMetric(f64, f64, f64),

    #[error("invariant line index must be in 1..=4, got {0}")]
    InvalidLine(usize),

    #[error("expected a unit vector, got norm {0}")]
    NotUnit(f64),

    #[error("point with norm {0} is not inside the open unit ball")]
    OutsideBall(f64),

    #[error("sphere point is not in the domain of chart {0}")]
    OutsideChart(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}
