use thiserror::Error;

/// Errors raised by the simulator library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("null constraints span the whole array space")]
    InfeasibleNull,
    #[error("legitimate channels leave no nullspace for artificial noise")]
    NoNullspace,
    #[error("{streams} streams exceed {rf_chains} RF chains")]
    Capacity { streams: usize, rf_chains: usize },
    #[error("role error: {0}")]
    Role(String),
    #[error("power split infeasible: beta + gamma = {0} > 1")]
    InfeasibleSplit(f64),
    #[error("power profile violates feasibility constraints")]
    Infeasible,
    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Config(Vec<String>),
    #[error("slot {slot}: {message}")]
    Slot { slot: usize, message: String },
}

pub type Result<T> = std::result::Result<T, SimError>;
