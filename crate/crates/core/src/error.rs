use thiserror::Error;

/// Errors raised by graph construction, group enumeration, constant
/// computation and bound evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("unknown vertex {vertex} (graph has {count} vertices)")]
    UnknownVertex { vertex: usize, count: usize },

    #[error("function has no value at vertex {0}")]
    MissingValue(usize),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("resource budget exceeded: {what} would exceed the limit of {limit}")]
    Budget { what: &'static str, limit: u64 },

    #[error("profile evaluated at radius {radius} beyond its last tabulated radius {last}")]
    ProfileExhausted { radius: f64, last: f64 },

    #[error("radius {radius} lies outside the valid regime [{from}, inf) of the {kind} bound")]
    Regime { kind: String, radius: f64, from: f64 },

    #[error("numerical failure: {message} (residual {residual:e})")]
    Numerical { message: String, residual: f64 },

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}
