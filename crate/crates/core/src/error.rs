use thiserror::Error;

/// Errors raised by the discretization, solvers and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input violated a documented precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Fields or states defined on different grids were combined.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// An iterative method ran out of iterations.
    #[error("{method} did not converge after {iterations} iterations (last residual {residual:.3e})")]
    Convergence {
        method: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// Newton iteration failed to make progress; carries the residual history.
    #[error("{method} diverged after {} iterations (residual history {history:?})", history.len())]
    Divergence {
        method: &'static str,
        history: Vec<f64>,
    },

    /// A factorization hit a (numerically) zero pivot.
    #[error("singular matrix: zero pivot in column {column}")]
    Singular { column: usize },

    /// A solver converged to a state outside its admissible set.
    #[error("inadmissible solution: {0}")]
    Inadmissible(String),

    /// Krylov eigenvalue iteration failed.
    #[error("spectrum computation failed: {0}")]
    Spectrum(String),
}

pub type Result<T> = std::result::Result<T, Error>;
