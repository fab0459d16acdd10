use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::{dft, interpolate, SampledGrid};
use super::FourierCoeffs;
use crate::error::{Error, Result};
use crate::problem::{Potential, PotentialKind};

/// How the potential matrix entries `∫ V ē_k e_l` are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialAssembly {
    /// Closed-form coefficients (no integration error). For sampled
    /// potentials these are the coefficients of the trigonometric interpolant.
    Exact,
    /// Discrete Fourier transform of `V` sampled on `ng` points, i.e. the
    /// coefficients of the interpolant `I_{N_g}(V)`.
    Grid { ng: usize },
}

/// Coefficients of the potential for `|g| ≤ cutoff`, in the `e_g` basis.
pub fn potential_coeffs(
    pot: &Potential,
    cutoff: usize,
    assembly: PotentialAssembly,
) -> Result<FourierCoeffs> {
    match assembly {
        PotentialAssembly::Exact => match pot.kind {
            PotentialKind::Zero => Ok(FourierCoeffs::zeros(cutoff)),
            // The potential is the interpolant of its samples, so its
            // coefficients are finitely many and known exactly.
            PotentialKind::CustomSamples => {
                Ok(interpolate(&SampledGrid::from_real(&pot.params)?).resized(cutoff))
            }
            _ => {
                // Probe once so unsupported kinds fail before allocating.
                pot.fourier_coeff(0)?;
                Ok(FourierCoeffs::from_fn(cutoff, |g| {
                    Complex64::new(pot.fourier_coeff(g).expect("checked"), 0.0)
                }))
            }
        },
        PotentialAssembly::Grid { ng } => {
            if ng < 2 * cutoff + 1 {
                return Err(Error::Precondition(format!(
                    "potential grid of {ng} points is too coarse for cutoff {cutoff} (needs {})",
                    2 * cutoff + 1
                )));
            }
            let samples = SampledGrid::sample(ng, |x| pot.value(&[x]))?;
            let mut out = dft(&samples).to_coeffs(cutoff);
            out.symmetrize();
            Ok(out)
        }
    }
}

/// Hamiltonian `H_{kl} = k² δ_{kl} + (2π)^{-1/2} (V̂ + f̂)_{k−l}` on `|k|, |l| ≤ N`.
///
/// `vhat` and `fhat` hold the `e_g` coefficients of `V` and of `f(ρ̃)` up to
/// `|g| ≤ 2N`. With this normalization `x* H x` equals
/// `∫ |v′|² + (V + f(ρ̃)) |v|²` for `v = Σ x_k e_k`.
pub fn assemble_hamiltonian(
    vhat: &FourierCoeffs,
    fhat: &FourierCoeffs,
    n: usize,
) -> Result<DMatrix<Complex64>> {
    if vhat.cutoff() < 2 * n || fhat.cutoff() < 2 * n {
        return Err(Error::Argument(format!(
            "potential cutoffs ({}, {}) must reach 2N = {}",
            vhat.cutoff(),
            fhat.cutoff(),
            2 * n
        )));
    }
    let dim = 2 * n + 1;
    let s = 1.0 / (2.0 * PI).sqrt();
    let ni = n as i64;
    let h = DMatrix::from_fn(dim, dim, |i, j| {
        let (k, l) = (i as i64 - ni, j as i64 - ni);
        let mut entry = (vhat.get(k - l) + fhat.get(k - l)) * s;
        if k == l {
            entry += (k * k) as f64;
        }
        entry
    });
    let asym = (&h - h.adjoint())
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    assert!(
        asym <= 1e-12 * (1.0 + h.norm()),
        "assembled Hamiltonian is not Hermitian (defect {asym:.3e})"
    );
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::nonlinear_density_coeffs;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pure_laplacian() {
        let z = FourierCoeffs::zeros(8);
        let h = assemble_hamiltonian(&z, &z, 4).unwrap();
        for i in 0..9 {
            for j in 0..9 {
                let k = i as f64 - 4.0;
                let expect = if i == j { k * k } else { 0.0 };
                assert_eq!(h[(i, j)], Complex64::new(expect, 0.0));
            }
        }
    }

    #[test]
    fn constant_density_shifts_diagonal() {
        let c = 0.3;
        let mut rho = FourierCoeffs::zeros(6);
        rho.set(0, Complex64::new(c * (2.0 * PI).sqrt(), 0.0));
        let h = assemble_hamiltonian(&FourierCoeffs::zeros(6), &rho, 3).unwrap();
        for i in 0..7 {
            let k = i as f64 - 3.0;
            assert!((h[(i, i)].re - (k * k + c)).abs() < 1e-14);
            for j in 0..7 {
                if i != j {
                    assert!(h[(i, j)].norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn dimension_mismatch() {
        let z = FourierCoeffs::zeros(5);
        assert!(assemble_hamiltonian(&z, &z, 3).is_err());
    }

    #[test]
    fn quadratic_form_matches_dense_quadrature() {
        let n = 4;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pot = Potential::sin_kink();
        let vhat = potential_coeffs(&pot, 2 * n, PotentialAssembly::Exact).unwrap();
        let mut w = FourierCoeffs::from_fn(n, |_| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        w.symmetrize();
        let rho = nonlinear_density_coeffs(&w);
        let h = assemble_hamiltonian(&vhat, &rho, n).unwrap();

        let mut x = FourierCoeffs::from_fn(n, |_| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        x.symmetrize();
        let xv = nalgebra::DVector::from_column_slice(x.as_slice());
        let form = (xv.adjoint() * &h * &xv)[(0, 0)].re;

        // Trapezoid rule on 10⁵ points; v, v′, ρ are smooth, V has a kink
        // at π which lies on the grid.
        let m = 100_000;
        let step = 2.0 * PI / m as f64;
        let norm = 1.0 / (2.0 * PI).sqrt();
        let mut acc = 0.0;
        for j in 0..m {
            let t = j as f64 * step;
            let (mut v, mut dv, mut wv) = (
                Complex64::default(),
                Complex64::default(),
                Complex64::default(),
            );
            for k in -(n as i64)..=n as i64 {
                let e = Complex64::from_polar(norm, k as f64 * t);
                v += x.get(k) * e;
                dv += x.get(k) * e * Complex64::new(0.0, k as f64);
                wv += w.get(k) * e;
            }
            acc += dv.norm_sqr() + (pot.value(&[t]) + wv.norm_sqr()) * v.norm_sqr();
        }
        let quad = acc * step;
        assert!(
            (form - quad).abs() <= 1e-8 * quad.abs(),
            "form={form} quad={quad}"
        );
    }

    #[test]
    fn grid_assembly_requires_resolution() {
        assert!(potential_coeffs(
            &Potential::sin_kink(),
            8,
            PotentialAssembly::Grid { ng: 16 }
        )
        .is_err());
        assert!(potential_coeffs(
            &Potential::sin_kink(),
            8,
            PotentialAssembly::Grid { ng: 17 }
        )
        .is_ok());
        assert!(matches!(
            potential_coeffs(&Potential::harmonic_2d(), 2, PotentialAssembly::Exact),
            Err(Error::UnsupportedExactCoefficients(_))
        ));
    }

    #[test]
    fn sampled_potential_coefficients_are_exact() {
        let samples: Vec<f64> = (0..8)
            .map(|j| 1.0 + (2.0 * PI * j as f64 / 8.0).cos())
            .collect();
        let pot = Potential::custom_samples(samples);
        let exact = potential_coeffs(&pot, 6, PotentialAssembly::Exact).unwrap();
        let s = (2.0 * PI).sqrt();
        for g in -6..=6i64 {
            let expected = match g.abs() {
                0 => s,
                1 => s / 2.0,
                _ => 0.0,
            };
            assert!(
                (exact.get(g) - Complex64::new(expected, 0.0)).norm() < 1e-14,
                "g = {g}"
            );
        }
        let grid = potential_coeffs(&pot, 6, PotentialAssembly::Grid { ng: 64 }).unwrap();
        assert!(grid.sub(&exact).l2_norm() < 1e-13);
    }
}
