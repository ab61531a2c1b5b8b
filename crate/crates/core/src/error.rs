use std::io;

use thiserror::Error;

/// Errors produced by samplers, evaluators, and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid ensemble parameters (n={n}, p={p}, q={q}): {reason}")]
    InvalidParams {
        n: usize,
        p: usize,
        q: usize,
        reason: String,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    /// A sample fell outside the support where the evaluated functional is defined.
    #[error("sample outside the support: {0}")]
    Domain(String),

    /// An integral or series has no finite value, or failed to converge numerically.
    #[error("divergent computation: {0}")]
    Divergent(String),

    #[error("bidiagonal SVD failed to converge after {0} sweeps")]
    NoConvergence(usize),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
