//! Error norms, the eigenvalue-error decomposition, adjoint solves and
//! convergence studies.

mod errors;
mod linearized;
mod study;
mod table;

pub use errors::{align, compare, error_norms, ErrorSummary};
pub use linearized::{
    lambda_decomposition, solve_adjoint, AdjointSolve, LambdaDecomposition, RHO_FLOOR,
};
pub use study::{convergence_study, quadrature_study, ReferenceSpec, StudyFamily, StudyOptions};
pub use table::{fit_slope, Column, LogFit, SlopeFit, StudyRow, StudyTable};
