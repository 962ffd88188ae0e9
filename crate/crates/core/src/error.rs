use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The kernel window around `x` contains no node, so Shepard's quotient is 0/0.
    #[error("point {x} is not covered by any kernel support")]
    UncoveredPoint { x: f64 },

    /// Leave-one-out denominator vanished for the node at this (sorted) index.
    #[error("node {index} is isolated: leave-one-out denominator vanishes")]
    IsolatedNode { index: usize },

    #[error("alternating sum did not stabilise below {max_bits} bits (best estimate {estimate})")]
    NumericInstability { max_bits: usize, estimate: f64 },

    #[error("eps = {eps} does not exceed the validity threshold {threshold}")]
    ValidityViolation { eps: f64, threshold: f64 },

    #[error("bound is vacuous: gamma = {gamma} >= p_fail / 2 = {half_p}")]
    BoundVacuous { gamma: f64, half_p: f64 },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Short machine-readable tag used in the CLI's error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::UncoveredPoint { .. } => "uncovered_point",
            Error::IsolatedNode { .. } => "isolated_node",
            Error::NumericInstability { .. } => "numeric_instability",
            Error::ValidityViolation { .. } => "validity_violation",
            Error::BoundVacuous { .. } => "bound_vacuous",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Parse(_) => "parse",
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
