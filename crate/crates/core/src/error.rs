use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("enumeration too large: {requested} candidates exceeds budget {budget}")]
    EnumerationTooLarge { requested: f64, budget: u64 },

    #[error("complement search exhausted up to word length {0}")]
    ComplementSearchExhausted(usize),

    #[error("derivative order unavailable: requested {requested}, oracle provides {available}")]
    DerivativeOrderUnavailable { requested: usize, available: usize },

    #[error("order beyond quadrature support: |gamma| = {0}")]
    QuadratureOrder(usize),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("trajectory diverged at step {step}")]
    Diverged { step: usize },

    #[error("insufficient ladder: {usable} usable n values, need at least {required}")]
    InsufficientLadder { usable: usize, required: usize },

    #[error("experiment infeasible: {0}")]
    Infeasible(String),

    #[error("signal generation failed: {0}")]
    Signal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
