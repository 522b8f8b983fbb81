use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A variance-based statistic was requested on data with no spread.
    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),
}

pub type Result<T> = std::result::Result<T, Error>;
