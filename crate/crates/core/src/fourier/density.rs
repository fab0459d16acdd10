use num_complex::Complex64;

use super::grid::{dft, fft_size_at_least, synthesize, SampledGrid};
use super::FourierCoeffs;
use crate::error::{Error, Result};
use crate::problem::Nonlinearity;

/// Coefficients of `|u|²` (bandwidth `2N`), computed on a zero-padded grid
/// with `N_g ≥ 4N + 1` points; exact up to roundoff.
pub fn nonlinear_density_coeffs(u: &FourierCoeffs) -> FourierCoeffs {
    let n = u.cutoff();
    let ng = fft_size_at_least(4 * n + 1);
    let values = synthesize(u, ng);
    let rho: Vec<Complex64> = values
        .values()
        .iter()
        .map(|c| Complex64::new(c.norm_sqr(), 0.0))
        .collect();
    let grid = SampledGrid::new(rho).expect("non-empty grid");
    let mut out = dft(&grid).to_coeffs(2 * n);
    out.symmetrize();
    out
}

/// Coefficients of `f(ρ̃)` for `|g| ≤ 2N`, where `ρ̃` has cutoff `2N`.
///
/// For `F(ρ) = cρ²` this is `2c ρ̃` and exact. Otherwise `f(ρ̃)` is replaced
/// by its interpolant on `ng ≥ 4N + 1` points, which is not exact.
pub fn nonlinear_potential_coeffs(
    rho: &FourierCoeffs,
    nl: &Nonlinearity,
    ng: usize,
) -> Result<FourierCoeffs> {
    let cutoff = rho.cutoff();
    if nl.is_linear() {
        return Ok(FourierCoeffs::zeros(cutoff));
    }
    if nl.is_quadratic() {
        let mut out = rho.clone();
        out.scale(2.0 * nl.c);
        return Ok(out);
    }
    if ng < 2 * cutoff + 1 {
        return Err(Error::Precondition(format!(
            "grid of {ng} points cannot resolve density cutoff {cutoff}"
        )));
    }
    let samples = synthesize(rho, ng);
    let fvals: Vec<Complex64> = samples
        .values()
        .iter()
        .map(|c| Complex64::new(nl.f(c.re.max(0.0)), 0.0))
        .collect();
    let mut out = dft(&SampledGrid::new(fvals)?).to_coeffs(cutoff);
    out.symmetrize();
    Ok(out)
}
