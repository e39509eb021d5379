use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid torus, solver or run configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// An input violated an operation's precondition (e.g. a field that is not divergence-free).
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// An operation was called in a context where it is not defined.
    #[error("usage error: {0}")]
    Usage(String),
    #[error("run diverged at t = {t}")]
    Diverged { t: f64 },
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
