//! Error type shared by every module.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong in the laboratory.
///
/// Numerical operations prefer returning diagnostics over erroring; errors are
/// reserved for violated preconditions, unsupported inputs and genuine
/// convergence failures.
#[derive(Debug, Error)]
pub enum Error {
    /// A structural invariant of an input was violated (sizes, ranges, flags).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A point left the domain it was required to stay in.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input is structurally fine but outside what the implementation supports
    /// (for example a factorization of a function vanishing on the grid).
    #[error("unsupported input: {0}")]
    UnsupportedInput(String),

    /// An iteration hit its cap without meeting its tolerance. Carries the
    /// successive-difference history so the failure is diagnosable.
    #[error("iteration failed to converge after {iterations} steps (last diff {last_diff:.3e})")]
    ConvergenceFailure {
        iterations: usize,
        last_diff: f64,
        history: Vec<f64>,
    },

    /// A dense linear solve met a (numerically) singular matrix.
    #[error("singular linear system: {0}")]
    SingularSystem(String),

    /// Requested accuracy could not be met; carries the achieved value.
    #[error("accuracy not met: {what} achieved {achieved:.3e}, required {required:.3e}")]
    AccuracyNotMet {
        what: String,
        achieved: f64,
        required: f64,
    },
}
