//! Linearized (adjoint) problem on the orthogonal complement of the ground
//! state, for both discretization families.

use std::f64::consts::PI;
use std::sync::Arc;

use groundstate::analysis::solve_adjoint;
use groundstate::fem::FEFunction;
use groundstate::fourier::FourierCoeffs;
use groundstate::problem::ProblemSpec;
use groundstate::scf::{solve_ground_state, Discretization, SCFConfig, State};
use num_complex::Complex64;

fn main() -> groundstate::Result<()> {
    let cfg = SCFConfig::default();

    let problem = ProblemSpec::sin_kink_benchmark();
    let disc = Discretization::fourier(20);
    let r = solve_ground_state(&problem, &disc, &cfg)?;
    let w = FourierCoeffs::from_fn(20, |k| Complex64::new(1.0 / (1.0 + (k * k) as f64), 0.0));
    let a = solve_adjoint(&State::Fourier(w), &r.u, r.lambda, &problem, &disc)?;
    let psi = a.psi.as_fourier().expect("Fourier");
    println!(
        "Fourier N=20: residual {:.2e}, <psi,u> = {:.1e}, ||psi|| = {:.6}",
        a.residual,
        psi.inner(r.u.as_fourier().unwrap()).norm(),
        psi.l2_norm()
    );

    let problem = ProblemSpec::harmonic_square_benchmark();
    let disc = Discretization::fem(16, 1);
    let r = solve_ground_state(&problem, &disc, &cfg)?;
    let u = r.u.as_fem().expect("FE state");
    let w = FEFunction::interpolate(Arc::clone(&u.space), |x| (x[0] * (PI - x[0])) * x[1].sin());
    let a = solve_adjoint(&State::Fem(w), &r.u, r.lambda, &problem, &disc)?;
    let psi = a.psi.as_fem().expect("FE state");
    let overlap = u.space.mass().bilinear(&psi.coeffs, &u.coeffs);
    println!(
        "P1 n=16: residual {:.2e} after {} CG steps, (psi,u) = {overlap:.1e}, ||psi|| = {:.6}",
        a.residual,
        a.iterations,
        psi.l2_norm()
    );
    Ok(())
}
