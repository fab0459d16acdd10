//! Non-quadratic nonlinearities F(ρ) = c ρ^m, where f(ρ̃) is evaluated on a
//! grid instead of exactly.

use groundstate::problem::{Geometry, Nonlinearity, Potential, ProblemSpec};
use groundstate::scf::{solve_ground_state, Discretization, SCFConfig};

fn main() -> groundstate::Result<()> {
    for m in [1.25, 1.5, 2.0, 2.5] {
        let problem = ProblemSpec::new(
            Geometry::PeriodicInterval,
            Potential::sin_kink(),
            Nonlinearity::new(1.0, m)?,
        )?;
        let r = solve_ground_state(
            &problem,
            &Discretization::fourier(24),
            &SCFConfig::default(),
        )?;
        println!(
            "m = {m:<4}  lambda {:.10}  E {:.10}  {} iterations",
            r.lambda, r.energy, r.iterations
        );
    }
    Ok(())
}
