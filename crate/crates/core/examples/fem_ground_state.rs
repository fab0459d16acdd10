//! Harmonic trap on (0, π)² with P1 and P2 elements.

use groundstate::problem::ProblemSpec;
use groundstate::scf::{solve_ground_state, Discretization, SCFConfig};

fn main() -> groundstate::Result<()> {
    let problem = ProblemSpec::harmonic_square_benchmark();
    for degree in [1, 2] {
        for n in [4, 8, 16] {
            let r = solve_ground_state(
                &problem,
                &Discretization::fem(n, degree),
                &SCFConfig::default(),
            )?;
            let u = r.u.as_fem().expect("FE state");
            let centre = u.eval(&[std::f64::consts::FRAC_PI_2; 2]);
            println!(
                "P{degree} n={n:>2}  dofs {:>4}  lambda {:.10}  E {:.10}  u(centre) {centre:.6}  ({} its)",
                u.space.dof_count(),
                r.lambda,
                r.energy,
                r.iterations
            );
        }
    }
    Ok(())
}
