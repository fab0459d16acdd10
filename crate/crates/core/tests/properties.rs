mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use groundstate::analysis::fit_slope;
use groundstate::fem::{build_mesh, FEFunction, FESpace};
use groundstate::fourier::{
    assemble_hamiltonian, interpolate, nonlinear_density_coeffs, synthesize, FourierCoeffs,
    SampledGrid,
};
use groundstate::problem::{Geometry, Nonlinearity, Potential, ProblemSpec};
use groundstate::scf::{rayleigh_value, solve_ground_state, Discretization, SCFConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn coeffs(n: usize, seed: u64) -> FourierCoeffs {
    common::random_coeffs(n, &mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quartic_grid_sum_is_exact(n in 1usize..16, extra in 0usize..40, seed: u64) {
        let v = coeffs(n, seed);
        let ng = 4 * n + 1 + extra;
        let grid: f64 = synthesize(&v, ng).values().iter().map(|c| c.norm_sqr().powi(2)).sum::<f64>() * 2.0 * PI / ng as f64;
        let exact = nonlinear_density_coeffs(&v).l2_norm().powi(2);
        prop_assert!((grid - exact).abs() <= 1e-11 * exact);
    }

    #[test]
    fn density_is_the_convolution(n in 0usize..14, seed: u64) {
        let v = coeffs(n, seed);
        let slow = common::density_by_convolution(&v);
        prop_assert!(nonlinear_density_coeffs(&v).sub(&slow).l2_norm() <= 1e-12 * (1.0 + slow.l2_norm()));
    }

    #[test]
    fn interpolation_round_trips(values in prop::collection::vec(-10.0f64..10.0, 1..70)) {
        let samples = SampledGrid::from_real(&values).unwrap();
        let back = synthesize(&interpolate(&samples), values.len());
        for (b, v) in back.values().iter().zip(&values) {
            prop_assert!((b.re - v).abs() < 1e-12 && b.im.abs() < 1e-12);
        }
    }

    #[test]
    fn synthesis_round_trips(n in 0usize..12, extra in 1usize..20, seed: u64) {
        let v = coeffs(n, seed);
        let ng = 2 * n + extra;
        let back = interpolate(&synthesize(&v, ng)).resized(n);
        prop_assert!(back.sub(&v).l2_norm() <= 1e-12 * (1.0 + v.l2_norm()));
    }

    #[test]
    fn hamiltonian_is_hermitian(n in 1usize..10, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vhat = common::random_real_coeffs(2 * n, &mut rng);
        let fhat = nonlinear_density_coeffs(&common::random_coeffs(n, &mut rng));
        let h = assemble_hamiltonian(&vhat, &fhat, n).unwrap();
        prop_assert!((&h - h.adjoint()).norm() <= 1e-14 * h.norm());
    }

    #[test]
    fn sobolev_norms_are_ordered(n in 0usize..10, seed: u64) {
        let v = coeffs(n, seed);
        prop_assert!(v.sobolev_norm(-1.0) <= v.l2_norm() + 1e-15);
        prop_assert!(v.l2_norm() <= v.sobolev_norm(1.0) + 1e-15);
    }

    #[test]
    fn power_laws_are_fitted_exactly(p in -6.0f64..6.0, c in 0.01f64..100.0) {
        let xs: Vec<f64> = (1..12).map(|i| 3.0 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| c * x.powf(p)).collect();
        let fit = fit_slope(&xs, &ys).unwrap();
        prop_assert!((fit.slope - p).abs() < 1e-10 && fit.rms < 1e-10);
    }

    #[test]
    fn prolongation_preserves_values(n in 1usize..6, degree in 1usize..3, seed: u64, x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let sides = [PI, 2.0];
        let coarse = Arc::new(FESpace::new(build_mesh(2, &sides, n).unwrap(), degree).unwrap());
        let fine = Arc::new(FESpace::new(build_mesh(2, &sides, 2 * n).unwrap(), degree).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c: Vec<f64> = (0..coarse.dof_count()).map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0)).collect();
        let u = FEFunction::new(coarse, c).unwrap();
        let p = u.prolongate(&fine).unwrap();
        let pt = [x * sides[0], y * sides[1]];
        prop_assert!((u.eval(&pt) - p.eval(&pt)).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn ground_state_is_normalized_and_consistent(c in 0.0f64..4.0, m in 1.3f64..2.7, n in 3usize..12) {
        let nl = Nonlinearity::new(c, m).unwrap();
        let problem = ProblemSpec::new(Geometry::PeriodicInterval, Potential::sin_kink(), nl).unwrap();
        let disc = Discretization::fourier(n);
        let r = solve_ground_state(&problem, &disc, &SCFConfig::default()).unwrap();
        prop_assert!((r.u.l2_norm() - 1.0).abs() < 1e-12);
        let rayleigh = rayleigh_value(&problem, &disc, &r.u).unwrap();
        prop_assert!((r.lambda - rayleigh).abs() < 1e-8 * r.lambda.abs().max(1.0));
        let u = r.u.as_fourier().unwrap();
        prop_assert!(u.conjugate_asymmetry() < 1e-12);
    }
}
