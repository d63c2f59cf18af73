use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("matrix is all zeros; spectral radius cannot be rescaled")]
    ZeroMatrix,

    #[error("ridge system is singular or ill-conditioned (condition estimate {cond:.3e}); use a larger lambda")]
    IllConditioned { cond: f64 },

    #[error("target ({x:.4}, {y:.4}) is outside the reachable workspace")]
    OutOfWorkspace { x: f64, y: f64 },

    #[error("arm state is not finite; dynamics diverged")]
    NonFiniteState,

    #[error("demonstration rejected: final distance {final_distance:.4} m to target ({x:.4}, {y:.4}) exceeds 0.01 m")]
    RejectedDemo { final_distance: f64, x: f64, y: f64 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("reservoir digest changed during stage-2 (before {before}, after {after}); the frozen weights were mutated")]
    DigestMismatch { before: String, after: String },

    #[error("mode {0} requires a trained context policy but the model has none")]
    MissingPolicy(&'static str),

    #[error("PPO update aborted on non-finite loss: {0}")]
    AbortedUpdate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Exit code class for the CLI: 1 for validation problems, 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse { .. } => 1,
            _ => 2,
        }
    }
}
