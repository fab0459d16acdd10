//! Stiffness, mass and weighted-mass matrices.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::space::FESpace;
use crate::problem::Potential;
use crate::sparse::CsrMatrix;

const CHUNK: usize = 4096;

/// Accumulates element matrices produced by `local(e, out)` (row-major,
/// `nloc × nloc`) into the space's sparsity pattern.
fn assemble_with(space: &FESpace, local: impl Fn(usize, &mut [f64]) + Sync) -> CsrMatrix {
    let nl2 = space.local_count().pow(2);
    let ne = space.element_count();
    let mut values = vec![0.0; space.pattern_nnz()];
    let mut buf = vec![0.0; CHUNK.min(ne) * nl2];
    for start in (0..ne).step_by(CHUNK) {
        let end = (start + CHUNK).min(ne);
        buf[..(end - start) * nl2]
            .par_chunks_mut(nl2)
            .enumerate()
            .for_each(|(i, out)| local(start + i, out));
        for e in start..end {
            let block = &buf[(e - start) * nl2..(e - start + 1) * nl2];
            for (&slot, v) in space.scatter(e).iter().zip(block) {
                if slot != usize::MAX {
                    values[slot] += v;
                }
            }
        }
    }
    space.matrix_with_values(values)
}

/// `∫ ∇φ_i · ∇φ_j`.
pub fn assemble_stiffness(space: &FESpace) -> CsrMatrix {
    let nloc = space.local_count();
    let d = space.dim();
    let rule = space.rule();
    assemble_with(space, |e, out| {
        out.fill(0.0);
        let map = space.element_map(e);
        let mut grads = vec![[0.0; 2]; nloc];
        for q in 0..rule.len() {
            let dref = space.dphi_at(q);
            for (a, g) in grads.iter_mut().enumerate() {
                for k in 0..d {
                    g[k] = (0..d).map(|l| map.inv_t[k][l] * dref[a * d + l]).sum();
                }
            }
            let w = rule.weights[q] * map.det;
            for a in 0..nloc {
                for b in 0..nloc {
                    out[a * nloc + b] +=
                        w * (grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1]);
                }
            }
        }
    })
}

/// `∫ φ_i φ_j`.
pub fn assemble_mass(space: &FESpace) -> CsrMatrix {
    weighted(space, |_, _| 1.0)
}

/// `∫ w φ_i φ_j` with `w` given at the quadrature points, laid out
/// `[element][point]` (see [`FESpace::qp_coords`]).
pub fn assemble_weighted_mass(space: &FESpace, w: &[f64]) -> Result<CsrMatrix> {
    if w.len() != space.qp_count() {
        return Err(Error::Argument(format!(
            "weight has {} values but the space has {} quadrature points",
            w.len(),
            space.qp_count()
        )));
    }
    let nq = space.quad_points_per_element();
    Ok(weighted(space, |e, q| w[e * nq + q]))
}

fn weighted(space: &FESpace, w: impl Fn(usize, usize) -> f64 + Sync) -> CsrMatrix {
    let nloc = space.local_count();
    let rule = space.rule();
    assemble_with(space, |e, out| {
        out.fill(0.0);
        let det = space.element_map(e).det;
        for q in 0..rule.len() {
            let phi = space.phi_at(q);
            let s = rule.weights[q] * det * w(e, q);
            for a in 0..nloc {
                let sa = s * phi[a];
                for b in 0..nloc {
                    out[a * nloc + b] += sa * phi[b];
                }
            }
        }
    })
}

/// The potential sampled at the quadrature points.
pub fn potential_at_qps(space: &FESpace, pot: &Potential) -> Vec<f64> {
    space
        .qp_coords()
        .chunks(space.dim())
        .map(|x| pot.value(x))
        .collect()
}
