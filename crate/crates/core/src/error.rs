use thiserror::Error;

/// Errors produced by the solver, the discretizations and the study drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("exact Fourier coefficients are not available for the {0} potential")]
    UnsupportedExactCoefficients(&'static str),

    #[error("norm {0} is not supported by this discretization")]
    UnsupportedNorm(&'static str),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("matrix error: {0}")]
    Matrix(String),

    #[error("no convergence after {iterations} iterations (last residual {residual:.3e})")]
    Convergence {
        iterations: usize,
        residual: f64,
        /// Best iterate found so far, when the caller may want to inspect it.
        best: Option<Vec<f64>>,
    },

    #[error("SCF did not converge after {iterations} iterations")]
    ScfConvergence {
        iterations: usize,
        trace: Vec<crate::scf::TraceEntry>,
    },

    #[error("projected second-variation operator is not positive definite")]
    IndefiniteAdjoint,

    #[error("study aborted at parameter {param}: {source}")]
    Study {
        param: f64,
        partial: Box<crate::analysis::StudyTable>,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
