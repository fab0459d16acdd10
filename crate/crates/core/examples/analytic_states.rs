//! Problems with closed-form ground states against the numerical solver.

use std::f64::consts::PI;

use groundstate::problem::{analytic_ground_state, Geometry, Nonlinearity, Potential, ProblemSpec};
use groundstate::scf::{solve_ground_state, Discretization, SCFConfig};

fn main() -> groundstate::Result<()> {
    let cases = [
        (
            "periodic, V=0, F=rho^2/2",
            ProblemSpec::new(
                Geometry::PeriodicInterval,
                Potential::zero(),
                Nonlinearity::quadratic(),
            )?,
            Discretization::fourier(8),
        ),
        (
            "periodic, V=0, F=rho^1.5",
            ProblemSpec::new(
                Geometry::PeriodicInterval,
                Potential::zero(),
                Nonlinearity::new(1.0, 1.5)?,
            )?,
            Discretization::fourier(8),
        ),
        (
            "rectangle, linear",
            ProblemSpec::new(
                Geometry::DirichletRectangle {
                    sides: vec![PI, 2.0],
                },
                Potential::zero(),
                Nonlinearity::linear(),
            )?,
            Discretization::fem(16, 2),
        ),
    ];
    for (name, problem, disc) in cases {
        let exact = analytic_ground_state(&problem).expect("closed form");
        let r = solve_ground_state(&problem, &disc, &SCFConfig::default())?;
        println!("{name}");
        println!(
            "  lambda  exact {:.12}  computed {:.12}",
            exact.lambda, r.lambda
        );
        println!(
            "  energy  exact {:.12}  computed {:.12}",
            exact.energy, r.energy
        );
    }
    Ok(())
}
