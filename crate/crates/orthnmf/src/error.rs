use thiserror::Error;

/// Errors raised by matrix construction, solvers, metrics, and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid solver configuration or an operation applied to an
    /// incompatible solver kind.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Matrix dimensions do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Structurally valid input that the operation cannot handle
    /// (zero column, empty table, single-class labels, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A value outside the domain the type admits (negative or
    /// non-finite entries).
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed file contents.
    #[error("parse error at {path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    /// A damped inner loop exhausted its iteration cap without finding a
    /// nonincreasing candidate. Carries the last damping value tried and
    /// both objective values so the breakdown can be diagnosed.
    #[error(
        "damping cap reached after {attempts} attempts (delta = {delta:e}): \
         candidate objective {candidate:e} still above reference {reference:e}"
    )]
    DampingFailure {
        attempts: usize,
        delta: f64,
        candidate: f64,
        reference: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
