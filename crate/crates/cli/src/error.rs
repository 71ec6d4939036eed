use biharm_core::Error as CoreError;

/// Failure classes of a run, each mapped to one process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Malformed, incomplete or unknown configuration keys.
    #[error("configuration error: {0}")]
    Config(String),
    /// Values that parse but are not admissible.
    #[error("validation error: {0}")]
    Validation(String),
    /// A solver ran but did not deliver a result.
    #[error("solver error: {0}")]
    Solver(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Validation(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        match e {
            CoreError::InvalidParams(_)
            | CoreError::Domain(_)
            | CoreError::UnsupportedChart(_)
            | CoreError::Resolution(_)
            | CoreError::Unsupported(_)
            | CoreError::Profile(_) => CliError::Validation(msg),
            CoreError::Stiffness { .. }
            | CoreError::Shooting { .. }
            | CoreError::Convergence { .. }
            | CoreError::Assembly(_) => CliError::Solver(msg),
            CoreError::Io(_) => CliError::Io(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
