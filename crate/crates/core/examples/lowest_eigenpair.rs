//! The linear eigensolver on its own: P1 Laplacian on (0, π)², dense and
//! inverse-iteration paths.

use std::f64::consts::PI;

use groundstate::eigsolve::{lowest_eigenpair, EigOptions, Method, SymOp};
use groundstate::fem::{build_mesh, FESpace};

fn main() -> groundstate::Result<()> {
    for n in [8, 16, 32, 64] {
        let space = FESpace::new(build_mesh(2, &[PI, PI], n)?, 1)?;
        let (k, m) = (space.stiffness(), space.mass());
        let opts = EigOptions {
            method: Method::InverseIteration,
            ..EigOptions::with_tol(1e-12)
        };
        let r = lowest_eigenpair(SymOp::Sparse(k), Some(SymOp::Sparse(m)), &opts)?;
        println!(
            "n={n:<3} dofs {:<5} lambda_1 {:.10} (exact 2)  {} iterations, residual {:.1e}",
            space.dof_count(),
            r.lambda,
            r.iterations,
            r.residual
        );
    }
    Ok(())
}
