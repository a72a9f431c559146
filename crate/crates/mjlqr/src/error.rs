//! Error taxonomy shared by every solver and the CLI.
//!
//! Variants separate caller mistakes (shape or value problems in the input)
//! from numerical failures (a solve that cannot be certified at the requested
//! tolerance). The CLI maps the taxonomy onto process exit codes.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes surfaced by the library.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// An input value violates a documented invariant (not a shape problem).
    #[error("invalid {what}: {reason}")]
    InvalidInput { what: String, reason: String },

    /// Matrix or tuple shapes are incompatible.
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },

    /// The policy is not mean-square stabilizing, so the requested quantity
    /// does not exist (cost, value, correlation and gradients all diverge).
    #[error("policy is not mean-square stabilizing: lifted spectral radius {rho:.6} >= 1")]
    Stability { rho: f64 },

    /// A linear solve could not be certified at the requested residual.
    #[error("lifted linear solve failed: {context}")]
    SingularSystem { context: String },

    /// An iteration hit its cap before meeting the stopping rule.
    #[error("no convergence after {iterations} iterations: residual {residual:.3e} above tolerance {tol:.3e}")]
    NotConverged {
        iterations: usize,
        residual: f64,
        tol: f64,
    },

    /// An optimizer step produced a worse or unstable iterate even though the
    /// step size was within the certified bound; reported loudly instead of
    /// being repaired, since it signals a numerical-tolerance breach.
    #[error("step of size {eta} rejected: {reason}")]
    StepRejected { eta: f64, reason: String },

    /// A scalar argument lies outside the domain of the requested formula.
    #[error("domain error: {context}")]
    Domain { context: String },

    /// Random instance generation could not satisfy the requested spectrum.
    #[error("instance generation failed: {context}")]
    GenerationFailed { context: String },

    /// File system failure while reading or writing artifacts.
    #[error("i/o failure on {path}: {message}")]
    Io { path: String, message: String },

    /// A problem or gain file does not parse or fails validation.
    #[error("malformed input: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn dim(context: impl Into<String>) -> Self {
        Error::DimensionMismatch {
            context: context.into(),
        }
    }

    pub(crate) fn invalid(what: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            what: what.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, err: &std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}
