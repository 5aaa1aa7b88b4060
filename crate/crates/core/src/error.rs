use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("idler frequency not positive: omega_s = {omega_s:e} >= omega_p = {omega_p:e}")]
    NonPositiveIdler { omega_p: f64, omega_s: f64 },

    /// The transverse-momentum balance has no real solution: |sin theta_i| would exceed 1.
    #[error("no propagating idler: required sin(theta_i) = {sine}")]
    NoPropagatingIdler { sine: f64 },

    #[error("quadrature did not reach tolerance {tolerance:e} (error estimate {estimate:e})")]
    QuadratureFailure { estimate: f64, tolerance: f64 },

    #[error("pump and signal confocal parameters differ by more than 5%: {pump:e} m vs {signal:e} m")]
    MismatchedConfocal { pump: f64, signal: f64 },

    #[error("image at infinity")]
    ImageAtInfinity,

    #[error("best-focus search did not converge: {0}")]
    NoConvergence(String),

    #[error("field grids differ: {0}")]
    GridMismatch(String),

    #[error("no fringes: found {extrema} extrema, need at least 3")]
    NoFringes { extrema: usize },

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("non-finite result: {0}")]
    NonFinite(String),

    #[error("invalid scenario: {0}")]
    Validation(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error once scenario context has been peeled off.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    /// Process exit code for the command-line tool: 2 for malformed input,
    /// 4 for filesystem trouble, 3 for anything the engines reject.
    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::Parse { .. } | Error::Validation(_) => 2,
            Error::Io(_) | Error::Csv(_) => 4,
            _ => 3,
        }
    }
}
