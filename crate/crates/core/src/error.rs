use thiserror::Error;

/// Errors surfaced by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid or inconsistent parameters (bad Lévy measure, unknown engine, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// A mathematical precondition of the requested operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A numerical routine failed to produce a trustworthy value.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Picard iteration stopped at `max_iters` without reaching the tolerance.
    #[error("picard iteration did not converge after {iters} iterations (residual {residual:e})")]
    NonConvergence {
        iters: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// True for errors caused by the caller's input rather than by the numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Precondition(_) | Error::Json(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
