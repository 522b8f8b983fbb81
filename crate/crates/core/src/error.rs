use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("horizon starting at sample {start} with {n_samples} samples runs past the end of a {len}-sample trial")]
    OutOfRange {
        start: usize,
        n_samples: usize,
        len: usize,
    },
    #[error("trial {trial} too short for T = {horizon_ms} ms: {len} samples, need {needed}")]
    TrialTooShort {
        trial: String,
        horizon_ms: u32,
        len: usize,
        needed: usize,
    },
    /// An aggregation level (sample, horizon, repeat or activity) was empty.
    #[error("nothing to aggregate at the {level} level")]
    EmptyGroup { level: &'static str },
    #[error("direction accuracy needs at least one non-static activity")]
    NoDynamicActivities,
    #[error(transparent)]
    Stats(#[from] compred_stats::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
