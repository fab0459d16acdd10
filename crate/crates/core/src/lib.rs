//! Ground states of nonlinear elliptic eigenvalue problems
//! `−Δu + V u + f(u²) u = λ u`, `‖u‖_{L²} = 1`.

pub mod analysis;
pub mod cli;
pub mod eigsolve;
pub mod error;
pub mod fem;
pub mod fourier;
pub mod problem;
pub mod scf;
pub mod sparse;

pub use error::{Error, Result};
