//! Exact Fourier coefficients of the kinked sine against grid (FFT)
//! coefficients, and the aliasing error that separates them.

use groundstate::fourier::{alias_error_norm, default_tail, potential_coeffs, PotentialAssembly};
use groundstate::problem::Potential;

fn main() -> groundstate::Result<()> {
    let pot = Potential::sin_kink();
    let n = 30;
    let exact = potential_coeffs(&pot, 2 * n, PotentialAssembly::Exact)?;
    println!("k    exact             Ng=128");
    let grid = potential_coeffs(&pot, 2 * n, PotentialAssembly::Grid { ng: 128 })?;
    for k in [0, 1, 2, 5, 10, 30, 60] {
        println!("{k:<4} {:+.10e}  {:+.10e}", exact.get(k).re, grid.get(k).re);
    }
    println!();
    println!("Ng      ||coeff diff||   alias sum       tail bound");
    for p in 7..=13 {
        let ng = 1 << p;
        let grid = potential_coeffs(&pot, 2 * n, PotentialAssembly::Grid { ng })?;
        let alias = alias_error_norm(&pot, n, ng, default_tail(n, ng))?;
        println!(
            "{ng:<7} {:.6e}     {:.6e}    {:.1e}",
            grid.sub(&exact).l2_norm(),
            alias.value,
            alias.tail_bound
        );
    }
    Ok(())
}
