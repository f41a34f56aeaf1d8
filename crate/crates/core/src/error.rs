use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised by topology construction, simulation and estimation.
#[derive(Debug, Error, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "error", content = "detail", rename_all = "kebab-case")]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("topology would have {requested} vertices, budget is {budget}")]
    VertexBudget { requested: usize, budget: usize },

    #[error("radius {requested} exceeds safe radius {safe}; truncation would bias the result")]
    TruncationBias { requested: usize, safe: usize },

    #[error("topology mismatch: {0}")]
    TopologyMismatch(String),

    #[error("operation requires a tree topology")]
    NotATree,

    #[error("vertex {0} is not in the tree subset Delta")]
    NotInDelta(u32),

    #[error("time {time} outside window [{start}, {end}]")]
    OutOfWindow { time: f64, start: f64, end: f64 },

    #[error("state space too large: {vertices} vertices (limit {limit})")]
    TooLarge { vertices: usize, limit: usize },

    #[error("insufficient statistics: {what} (have {have}, need {need})")]
    InsufficientStatistics {
        what: String,
        have: usize,
        need: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
