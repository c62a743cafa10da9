//! Scenario-driven front end for the mssolve solvers.

pub mod commands;
pub mod output;
pub mod scenario;

use mssolve_core::Error;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse { line: Option<usize>, message: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("solver error: {0}")]
    Solver(#[from] Error),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("verification failed: criteria {0:?}")]
    VerifyFailed(Vec<usize>),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    /// 3 for invalid input (including data the solvers reject as ill-posed), 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Validation(_) => 3,
            CliError::Solver(e) => match e {
                Error::InvalidConfig(_)
                | Error::CompatibilityViolated { .. }
                | Error::CoercivityViolated(_)
                | Error::SeparationViolation { .. }
                | Error::NonPositiveRadius { .. }
                | Error::CutoffMismatch { .. } => 3,
                _ => 2,
            },
            CliError::Io(_) | CliError::VerifyFailed(_) => 2,
        }
    }
}
