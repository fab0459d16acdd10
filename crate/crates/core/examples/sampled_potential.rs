//! A potential given only by equispaced samples: its trigonometric
//! interpolant enters the Hamiltonian exactly.

use std::f64::consts::PI;

use groundstate::problem::{Geometry, Nonlinearity, Potential, ProblemSpec};
use groundstate::scf::{solve_ground_state, Discretization, SCFConfig};

fn main() -> groundstate::Result<()> {
    let m = 64;
    let samples: Vec<f64> = (0..m)
        .map(|j| {
            let x = 2.0 * PI * j as f64 / m as f64;
            1.0 + (x - PI).powi(2) / 4.0
        })
        .collect();
    let problem = ProblemSpec::new(
        Geometry::PeriodicInterval,
        Potential::custom_samples(samples),
        Nonlinearity::quadratic(),
    )?;
    for n in [8, 16, 32] {
        let r = solve_ground_state(&problem, &Discretization::fourier(n), &SCFConfig::default())?;
        println!("N = {n:<3} lambda {:.12}  E {:.12}", r.lambda, r.energy);
    }
    Ok(())
}
