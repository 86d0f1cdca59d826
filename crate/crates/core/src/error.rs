use thiserror::Error;

/// Errors raised by configuration checks and numerical stages.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("mode {mode} is not resolvable with {elements} receive elements (|l| must be < M/2)")]
    ModeUnresolvable { mode: i32, elements: usize },
    #[error("modes {a} and {b} coincide modulo {elements}")]
    ModeAlias { a: i32, b: i32, elements: usize },
    #[error("user {user} at {range} m is closer than the far-field threshold {threshold} m")]
    NearField { user: usize, range: f64, threshold: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("training modes must include mode 0 for elevation estimation")]
    MissingZeroMode,
    #[error("zero pilot at training mode {mode_index}, subcarrier {subcarrier}")]
    ZeroPilot { mode_index: usize, subcarrier: usize },
    #[error("ill-conditioned inversion for user {user}: condition number {cond:.3e}")]
    IllConditioned { user: usize, cond: f64 },
    #[error("singular value decomposition did not converge")]
    SvdFailed,
    #[error("estimation failed: {0}")]
    Estimation(String),
    #[error("configuration parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
