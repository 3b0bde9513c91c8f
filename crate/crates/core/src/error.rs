use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SwarmError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParams { field: &'static str, reason: String },

    #[error("state space of {count} states exceeds the enumeration cap of {cap}")]
    EnumerationLimitExceeded { count: u128, cap: u128 },

    #[error("block {block} is already held by signature {signature}")]
    InvalidTransition { signature: String, block: usize },

    #[error("solver did not converge after {iterations} iterations (last change {last_change:e})")]
    NotConverged { iterations: usize, last_change: f64 },

    #[error("chain has {classes} closed communicating classes")]
    ReducibleChain { classes: usize },

    #[error("birth-death queue is unstable (arrival {arrival}, service {service})")]
    Unstable { arrival: f64, service: f64 },

    #[error("degenerate rates: {0}")]
    DegenerateRates(String),

    #[error("invalid state: {0}")]
    InvalidState(String),
}

pub type Result<T> = std::result::Result<T, SwarmError>;
