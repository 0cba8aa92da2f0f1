//! Error types shared across the simulation engines.

use thiserror::Error;

/// Unified error type for parameter validation, capacity guards, and
/// numerical failures.
#[derive(Debug, Error)]
pub enum Error {
    /// A physical parameter or configuration value is out of range.
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    /// A state vector violates a structural invariant (conservation,
    /// positivity slack, coherence bound).
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// The exact solver was asked for a system beyond its hard size limit.
    #[error("capacity exceeded: {what} requires n_atoms <= {max}, got {got}")]
    Capacity {
        what: &'static str,
        max: usize,
        got: usize,
    },

    /// The adaptive integrator could not continue (step underflow or a
    /// non-finite derivative); `t_last` is the last successfully reached time.
    #[error("integration failed at t = {t_last}: {reason}")]
    Integration { t_last: f64, reason: String },

    /// An analysis operation was applied to a run outside its validity
    /// regime (for example a two-level diagnostic on a driven run).
    #[error("wrong regime: {0}")]
    Regime(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
