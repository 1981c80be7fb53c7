use thiserror::Error;

/// Errors raised by the library.
///
/// The variants map onto the CLI's exit-code classes: argument and size
/// errors are caller mistakes, data/domain/infeasibility errors describe the
/// input, and numerical/convergence errors describe the solvers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("problem too large for exhaustive enumeration: {0}")]
    Size(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible: {message} (max achievable {max_achievable})")]
    Infeasible { message: String, max_achievable: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(
        "solver did not converge after {iterations} iterations (residual {residual:.3e})"
    )]
    NonConvergence {
        iterations: usize,
        residual: f64,
        best_pi: Vec<f64>,
        best_value: f64,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Data(err.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
