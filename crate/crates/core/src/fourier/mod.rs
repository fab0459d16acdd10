//! Periodic spectral discretization on `(0, 2π)`.
//!
//! The unknown is a [`FourierCoeffs`] vector on the modes `|k| ≤ N`, in the
//! orthonormal basis `e_k(x) = (2π)^{-1/2} e^{ikx}`. Matrix entries that
//! involve `V` or `f(ρ̃)` are the `(k − l)`-th coefficients of those
//! functions; they are either known exactly or obtained by FFT on a grid of
//! `N_g ≥ 4N + 1` points.

mod alias;
mod coeffs;
mod density;
mod grid;
mod hamiltonian;

pub use alias::{alias_error_norm, default_tail, AliasNorm};
pub use coeffs::FourierCoeffs;
pub use density::{nonlinear_density_coeffs, nonlinear_potential_coeffs};
pub use grid::{
    dft, fft_size_at_least, grid_integral, grid_point, interpolate, synthesize, DiscreteSpectrum,
    SampledGrid,
};
pub use hamiltonian::{assemble_hamiltonian, potential_coeffs, PotentialAssembly};

/// `Π_M v`.
pub fn project_modes(v: &FourierCoeffs, m: usize) -> crate::Result<FourierCoeffs> {
    v.project(m)
}

/// `‖v‖_{H^r}` with weights `(1 + k²)^r`.
pub fn sobolev_norm(v: &FourierCoeffs, r: f64) -> f64 {
    v.sobolev_norm(r)
}
