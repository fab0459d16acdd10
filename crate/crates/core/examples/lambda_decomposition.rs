//! Splits the eigenvalue error into its quadratic part and the nonlinear
//! remainder.

use groundstate::analysis::lambda_decomposition;
use groundstate::problem::ProblemSpec;
use groundstate::scf::{solve_ground_state, Discretization, SCFConfig};

fn main() -> groundstate::Result<()> {
    let problem = ProblemSpec::sin_kink_benchmark();
    let cfg = SCFConfig::default();
    let ref_disc = Discretization::fourier(65);
    let reference = solve_ground_state(&problem, &ref_disc, &cfg)?;
    println!("N    lambda error      term1             term2             term2/term1");
    for n in [4, 8, 12, 16, 24, 30] {
        let r = solve_ground_state(&problem, &Discretization::fourier(n), &cfg)?;
        let d = lambda_decomposition(&r.u, &reference.u, reference.lambda, &problem, &ref_disc)?;
        println!(
            "{n:<4} {:+.6e}     {:+.6e}     {:+.6e}     {:+.3e}",
            r.lambda - reference.lambda,
            d.term1,
            d.term2,
            d.term2 / d.term1
        );
    }
    Ok(())
}
