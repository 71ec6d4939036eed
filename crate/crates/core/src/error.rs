use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter tuple violates one of the admissibility inequalities.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// An argument lies outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The exterior chart only exists for α = 2.
    #[error("unsupported chart: {0}")]
    UnsupportedChart(String),

    /// Not enough nodes to form the requested stencil or quadrature.
    #[error("insufficient resolution: {0}")]
    Resolution(String),

    /// Operation not available in this parameter regime.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The step size collapsed below the representable minimum.
    #[error("step size underflow at x = {x:e} (last good state {state:?})")]
    Stiffness { x: f64, state: [f64; 4] },

    /// No sign change of ρ_u − ρ_v was found in the bracket sweep.
    #[error("shooting failed: {reason}")]
    Shooting {
        reason: String,
        /// (b, ρ_u, ρ_v) for every trial in the sweep.
        table: Vec<(f64, f64, f64)>,
    },

    /// Iterative solver did not converge within its iteration cap.
    #[error("no convergence after {iterations} iterations (best value {best:e})")]
    Convergence { iterations: usize, best: f64 },

    /// Banded factorization broke down (matrix not positive definite).
    #[error("operator assembly: {0}")]
    Assembly(String),

    /// Malformed or inconsistent profile data.
    #[error("profile: {0}")]
    Profile(String),

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
