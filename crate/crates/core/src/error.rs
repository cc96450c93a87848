use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("group descriptor mismatch: {0}")]
    DescriptorMismatch(String),

    #[error("capacity exceeded: {what} needs {requested}, cap is {cap}")]
    Capacity {
        what: &'static str,
        requested: u64,
        cap: u64,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("chain too short: no level separates the requested set")]
    ChainTooShort,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("window too small: {0}")]
    Window(String),

    #[error("matrix data error: {0}")]
    Data(String),

    #[error("recurrence overflow: {0}")]
    RecurrenceOverflow(String),

    #[error("tail target {target:e} unreachable within radius cap; best achieved {achieved:e}")]
    TailUnreachable { target: f64, achieved: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("enlarged windows overlap; smallest feasible epsilon is about {min_epsilon:e}")]
    WindowOverlap { min_epsilon: f64 },

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
