//! Ground state of the kinked-sine benchmark in the Fourier basis.
//!
//! cargo run --release --example fourier_ground_state -- 30

use groundstate::problem::ProblemSpec;
use groundstate::scf::{solve_ground_state, Discretization, SCFConfig};

fn main() -> groundstate::Result<()> {
    let n: usize = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(30);
    let problem = ProblemSpec::sin_kink_benchmark();
    let r = solve_ground_state(&problem, &Discretization::fourier(n), &SCFConfig::default())?;

    println!(
        "N = {n}: lambda = {:.12}, E = {:.12}, residual = {:.2e}",
        r.lambda, r.energy, r.residual
    );
    for t in &r.trace {
        let change = t
            .density_change
            .map_or("-".to_string(), |c| format!("{c:.2e}"));
        println!(
            "  it {:>3}  beta {:.3}  lambda {:.12}  |drho| {change}",
            t.iteration, t.damping, t.lambda
        );
    }
    let u = r.u.as_fourier().expect("Fourier state");
    for i in 0..=8 {
        let x = i as f64 * std::f64::consts::PI / 4.0;
        println!("  u({x:.3}) = {:+.8}", u.eval(x).re);
    }
    Ok(())
}
