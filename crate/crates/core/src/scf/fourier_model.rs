use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::ScfModel;
use crate::eigsolve::lowest_eigenpair_hermitian;
use crate::error::Result;
use crate::fourier::{
    assemble_hamiltonian, fft_size_at_least, nonlinear_density_coeffs, nonlinear_potential_coeffs,
    potential_coeffs, synthesize, FourierCoeffs, PotentialAssembly,
};
use crate::problem::{Nonlinearity, ProblemSpec};

/// Spectral model with cutoff `N`.
pub(crate) struct FourierModel {
    pub(crate) n: usize,
    pub(crate) nl: Nonlinearity,
    /// Grid for `f(ρ̃)` and `F(u²)` when the nonlinearity is not quadratic.
    pub(crate) nl_grid: usize,
    pub(crate) vhat: FourierCoeffs,
    /// `a(·,·)`: kinetic plus potential part.
    pub(crate) base: DMatrix<Complex64>,
}

impl FourierModel {
    pub fn new(
        problem: &ProblemSpec,
        n: usize,
        assembly: PotentialAssembly,
        nl_grid: Option<usize>,
    ) -> Result<Self> {
        let vhat = potential_coeffs(&problem.potential, 2 * n, assembly)?;
        let nl_grid = nl_grid.unwrap_or_else(|| fft_size_at_least(4 * n + 1));
        if nl_grid < 4 * n + 1 {
            return Err(crate::Error::Precondition(format!(
                "nonlinear grid of {nl_grid} points is below 4N + 1 = {}",
                4 * n + 1
            )));
        }
        let base = assemble_hamiltonian(&vhat, &FourierCoeffs::zeros(2 * n), n)?;
        Ok(Self {
            n,
            nl: problem.nonlinearity,
            nl_grid,
            vhat,
            base,
        })
    }

    pub fn hamiltonian(&self, rho: &FourierCoeffs) -> Result<DMatrix<Complex64>> {
        let fhat = nonlinear_potential_coeffs(rho, &self.nl, self.nl_grid)?;
        assemble_hamiltonian(&self.vhat, &fhat, self.n)
    }

    fn quadratic_form(m: &DMatrix<Complex64>, u: &FourierCoeffs) -> f64 {
        let x = DVector::from_column_slice(u.as_slice());
        (x.adjoint() * m * &x)[(0, 0)].re
    }

    /// `(∫ F(u²), ∫ f(u²) u²)`.
    fn nonlinear_integrals(&self, u: &FourierCoeffs) -> (f64, f64) {
        if self.nl.is_linear() {
            return (0.0, 0.0);
        }
        if self.nl.is_quadratic() {
            let rho = nonlinear_density_coeffs(u);
            let rho2 = rho.l2_norm().powi(2);
            return (self.nl.c * rho2, 2.0 * self.nl.c * rho2);
        }
        let values = synthesize(u, self.nl_grid);
        let dx = 2.0 * PI / self.nl_grid as f64;
        values.values().iter().fold((0.0, 0.0), |(a, b), v| {
            let r = v.norm_sqr();
            (a + dx * self.nl.big_f(r), b + dx * self.nl.f(r) * r)
        })
    }

    fn eigen(&self, h: &DMatrix<Complex64>) -> Result<(FourierCoeffs, f64)> {
        let eig = lowest_eigenpair_hermitian(h)?;
        Ok((realify(FourierCoeffs::from_vec(eig.vector)?), eig.lambda))
    }

    /// `a(u,u) + ∫ f(u²) u²`.
    pub fn rayleigh(&self, u: &FourierCoeffs) -> f64 {
        Self::quadratic_form(&self.base, u) + self.nonlinear_integrals(u).1
    }

    /// Dual `H¹` norm of `Π_N (A_u u − λ u)`.
    pub fn residual(&self, u: &FourierCoeffs, lambda: f64) -> Result<f64> {
        let h = self.hamiltonian(&nonlinear_density_coeffs(u))?;
        let x = DVector::from_column_slice(u.as_slice());
        let r = h * &x - &x * Complex64::new(lambda, 0.0);
        let n = self.n as i64;
        Ok(r.iter()
            .enumerate()
            .map(|(i, c)| c.norm_sqr() / (1.0 + ((i as i64 - n).pow(2)) as f64))
            .sum::<f64>()
            .sqrt())
    }
}

/// Turns an eigenvector into the coefficients of a real function with
/// `∫ u ≥ 0`, normalized in `L²`.
fn realify(x: FourierCoeffs) -> FourierCoeffs {
    let mut y = FourierCoeffs::from_fn(x.cutoff(), |k| 0.5 * (x.get(k) + x.get(-k).conj()));
    if y.l2_norm() < 1e-6 {
        y = FourierCoeffs::from_fn(x.cutoff(), |k| {
            Complex64::new(0.0, 0.5) * (x.get(k) - x.get(-k).conj())
        });
    }
    y.scale(1.0 / y.l2_norm());
    fix_sign(&mut y);
    y
}

/// Flips `u` so that `∫ u ≥ 0`, falling back to the largest coefficient
/// when the mean vanishes.
pub(crate) fn fix_sign(u: &mut FourierCoeffs) {
    let mean = u.get(0).re;
    let pivot = if mean.abs() > 1e-14 {
        mean
    } else {
        u.as_slice()
            .iter()
            .map(|c| c.re)
            .max_by(|a, b| a.abs().total_cmp(&b.abs()))
            .unwrap_or(0.0)
    };
    if pivot < 0.0 {
        u.scale(-1.0);
    }
}

impl ScfModel for FourierModel {
    type State = FourierCoeffs;
    type Density = FourierCoeffs;

    fn initial_state(&mut self) -> Result<(FourierCoeffs, f64)> {
        self.eigen(&self.base)
    }

    fn lowest_state(
        &mut self,
        rho: &FourierCoeffs,
        _warm: Option<(&FourierCoeffs, f64)>,
    ) -> Result<(FourierCoeffs, f64)> {
        let h = self.hamiltonian(rho)?;
        self.eigen(&h)
    }

    fn density(&self, u: &FourierCoeffs) -> FourierCoeffs {
        nonlinear_density_coeffs(u)
    }

    fn mix(&self, old: &FourierCoeffs, new: &FourierCoeffs, beta: f64) -> FourierCoeffs {
        let mut out = old.clone();
        out.scale(1.0 - beta);
        out.axpy(beta, new)
    }

    fn distance(&self, a: &FourierCoeffs, b: &FourierCoeffs) -> f64 {
        a.sub(b).l2_norm()
    }

    fn energy(&self, u: &FourierCoeffs) -> f64 {
        0.5 * Self::quadratic_form(&self.base, u) + 0.5 * self.nonlinear_integrals(u).0
    }
}
