use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::errors::align;
use crate::error::{Error, Result};
use crate::fem::{assemble_weighted_mass, potential_at_qps, FEFunction, FESpace};
use crate::fourier::{assemble_hamiltonian, dft, synthesize, FourierCoeffs, SampledGrid};
use crate::problem::{Nonlinearity, ProblemSpec};
use crate::scf::{Discretization, FourierModel, State};
use crate::sparse::{CsrMatrix, SparseCholesky};

/// Densities are clamped to this value wherever `f′` is evaluated and
/// unbounded at zero.
pub const RHO_FLOOR: f64 = 1e-14;

/// `λ_δ − λ = ⟨(A_u − λ)(u_δ − u), u_δ − u⟩ + ∫ w (u_δ − u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaDecomposition {
    pub term1: f64,
    pub term2: f64,
}

#[derive(Debug, Clone)]
pub struct AdjointSolve {
    /// Solution in the discrete orthogonal complement of `u`.
    pub psi: State,
    /// Dual norm of the residual of the projected equation.
    pub residual: f64,
    pub iterations: usize,
    /// Set when densities were clamped before evaluating `f′`.
    pub rho_floor: Option<f64>,
}

fn fprime_guarded(nl: &Nonlinearity, rho: f64) -> f64 {
    if nl.m < 2.0 {
        nl.fprime(rho.max(RHO_FLOOR))
    } else {
        nl.fprime(rho)
    }
}

fn floor_used(nl: &Nonlinearity) -> Option<f64> {
    (nl.m < 2.0 && nl.c != 0.0).then_some(RHO_FLOOR)
}

/// `u_δ² (f(u_δ²) − f(u²)) / (u_δ − u)`.
fn weight(nl: &Nonlinearity, ud: f64, u: f64) -> f64 {
    let diff = ud - u;
    if diff.abs() > 1e-14 {
        ud * ud * (nl.f(ud * ud) - nl.f(u * u)) / diff
    } else {
        ud * ud * (ud + u) * fprime_guarded(nl, u * u)
    }
}

fn check_unit(u: &State, what: &str) -> Result<()> {
    let norm = u.l2_norm();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::Precondition(format!(
            "{what} has L² norm {norm}, expected 1"
        )));
    }
    Ok(())
}

fn fourier_model(
    problem: &ProblemSpec,
    disc: &Discretization,
    n_state: usize,
) -> Result<FourierModel> {
    match disc {
        Discretization::Fourier {
            n,
            assembly,
            nonlinear_grid,
        } if *n == n_state => FourierModel::new(problem, *n, *assembly, *nonlinear_grid),
        _ => Err(Error::Argument(
            "state does not belong to the discretization".into(),
        )),
    }
}

fn fem_base(problem: &ProblemSpec, space: &FESpace) -> Result<CsrMatrix> {
    let v = potential_at_qps(space, &problem.potential);
    space
        .stiffness()
        .add_scaled(1.0, &assemble_weighted_mass(space, &v)?)
}

fn real_values(u: &FourierCoeffs, ng: usize) -> Vec<f64> {
    synthesize(u, ng).values().iter().map(|c| c.re).collect()
}

/// Splits `λ_δ − λ_ref` into the quadratic term and the nonlinear term,
/// evaluated in the reference discretization. `u_delta` is prolongated and
/// sign-aligned first.
pub fn lambda_decomposition(
    u_delta: &State,
    u_ref: &State,
    lambda_ref: f64,
    problem: &ProblemSpec,
    disc_ref: &Discretization,
) -> Result<LambdaDecomposition> {
    check_unit(u_delta, "u_δ")?;
    check_unit(u_ref, "reference state")?;
    let nl = problem.nonlinearity;
    match (align(u_delta, u_ref)?, u_ref) {
        (State::Fourier(d), State::Fourier(r)) => {
            let model = fourier_model(problem, disc_ref, r.cutoff())?;
            let e = d.sub(r);
            let x = DVector::from_column_slice(e.as_slice());
            let a_ee = (x.adjoint() * &model.base * &x)[(0, 0)].re;
            let ng = model.nl_grid;
            let dx = 2.0 * PI / ng as f64;
            let (ud, ur, ev) = (real_values(&d, ng), real_values(r, ng), real_values(&e, ng));
            let mut nl_part = 0.0;
            let mut term2 = 0.0;
            for j in 0..ng {
                nl_part += dx * nl.f(ur[j] * ur[j]) * ev[j] * ev[j];
                term2 += dx * weight(&nl, ud[j], ur[j]) * ev[j];
            }
            let term1 = a_ee + nl_part - lambda_ref * e.l2_norm().powi(2);
            Ok(LambdaDecomposition { term1, term2 })
        }
        (State::Fem(d), State::Fem(r)) => {
            let space = &r.space;
            let base = fem_base(problem, space)?;
            let e: Vec<f64> = d.coeffs.iter().zip(&r.coeffs).map(|(a, b)| a - b).collect();
            let (ud, ur, ev) = (
                space.eval_at_qps(&d.coeffs),
                space.eval_at_qps(&r.coeffs),
                space.eval_at_qps(&e),
            );
            let mut nl_part = 0.0;
            let mut term2 = 0.0;
            for (q, w) in space.qp_weights().iter().enumerate() {
                nl_part += w * nl.f(ur[q] * ur[q]) * ev[q] * ev[q];
                term2 += w * weight(&nl, ud[q], ur[q]) * ev[q];
            }
            let term1 =
                base.bilinear(&e, &e) + nl_part - lambda_ref * space.mass().bilinear(&e, &e);
            Ok(LambdaDecomposition { term1, term2 })
        }
        _ => unreachable!("align keeps the family"),
    }
}

/// Hermitian matrix of `E″(u) − λ` on the Fourier space of `u`.
pub(crate) fn fourier_second_variation(
    model: &FourierModel,
    u: &FourierCoeffs,
    lambda: f64,
) -> Result<DMatrix<Complex64>> {
    let nl = model.nl;
    let ng = model.nl_grid;
    let g: Vec<Complex64> = real_values(u, ng)
        .iter()
        .map(|v| {
            let rho = v * v;
            let extra = if nl.c == 0.0 {
                0.0
            } else {
                2.0 * fprime_guarded(&nl, rho) * rho
            };
            Complex64::new(nl.f(rho) + extra, 0.0)
        })
        .collect();
    let mut ghat = dft(&SampledGrid::new(g)?).to_coeffs(2 * model.n);
    ghat.symmetrize();
    let mut b = assemble_hamiltonian(&model.vhat, &ghat, model.n)?;
    for i in 0..b.nrows() {
        b[(i, i)] -= Complex64::new(lambda, 0.0);
    }
    Ok(b)
}

/// Solves `⟨(E″(u) − λ) ψ, v⟩ = ⟨w, v⟩` for `ψ` and all `v` in the discrete
/// orthogonal complement of `u`.
pub fn solve_adjoint(
    w: &State,
    u: &State,
    lambda: f64,
    problem: &ProblemSpec,
    disc: &Discretization,
) -> Result<AdjointSolve> {
    check_unit(u, "ground state")?;
    let rho_floor = floor_used(&problem.nonlinearity);
    match (w, u) {
        (State::Fourier(w), State::Fourier(u)) => {
            let model = fourier_model(problem, disc, u.cutoff())?;
            let b = fourier_second_variation(&model, u, lambda)?;
            let dim = b.nrows();
            let uv = DVector::from_column_slice(u.as_slice());
            let proj = DMatrix::<Complex64>::identity(dim, dim) - &uv * uv.adjoint();
            // On u⊥ the deflated matrix acts as B; along u it is the identity.
            let q = &proj * &b * &proj + &uv * uv.adjoint();
            let q = (&q + q.adjoint()) * Complex64::new(0.5, 0.0);
            let wv = DVector::from_column_slice(w.resized(u.cutoff()).as_slice());
            let rhs = &proj * &wv;
            let chol = nalgebra::Cholesky::new(q).ok_or(Error::IndefiniteAdjoint)?;
            let psi = &proj * chol.solve(&rhs);
            let residual = (&proj * (&b * &psi - &wv)).norm();
            Ok(AdjointSolve {
                psi: State::Fourier(FourierCoeffs::from_vec(psi.iter().copied().collect())?),
                residual,
                iterations: 1,
                rho_floor,
            })
        }
        (State::Fem(w), State::Fem(u)) => {
            let space = &u.space;
            let wp = w.prolongate(space)?;
            let nl = problem.nonlinearity;
            let g: Vec<f64> = space
                .eval_at_qps(&u.coeffs)
                .iter()
                .map(|v| {
                    let rho = v * v;
                    let extra = if nl.c == 0.0 {
                        0.0
                    } else {
                        2.0 * fprime_guarded(&nl, rho) * rho
                    };
                    nl.f(rho) + extra
                })
                .collect();
            let b = fem_base(problem, space)?
                .add_scaled(1.0, &assemble_weighted_mass(space, &g)?)?
                .add_scaled(-lambda, space.mass())?;
            let gram = space.stiffness().add_scaled(1.0, space.mass())?;
            let (psi, residual, iterations) = projected_cg(
                &b,
                &gram,
                space.mass(),
                &u.coeffs,
                &space.mass().matvec(&wp.coeffs),
            )?;
            Ok(AdjointSolve {
                psi: State::Fem(FEFunction::new(std::sync::Arc::clone(space), psi)?),
                residual,
                iterations,
                rho_floor,
            })
        }
        _ => Err(Error::Argument(
            "right-hand side and ground state come from different discretizations".into(),
        )),
    }
}

/// Preconditioned conjugate gradients for `B ψ = r` on
/// `{ψ : uᵀ M ψ = 0}`, preconditioned by the `H¹` Gram matrix.
fn projected_cg(
    b: &CsrMatrix,
    gram: &CsrMatrix,
    mass: &CsrMatrix,
    u: &[f64],
    rhs: &[f64],
) -> Result<(Vec<f64>, f64, usize)> {
    const MAX_ITER: usize = 1000;
    let mu = mass.matvec(u);
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    // P x = x − u (Muᵀ x) keeps primal vectors in u⊥; Pᵀ acts on residuals.
    let project = |x: &mut Vec<f64>| {
        let s = dot(&mu, x);
        x.iter_mut().zip(u).for_each(|(v, ui)| *v -= s * ui);
    };
    let project_t = |x: &mut Vec<f64>| {
        let s = dot(u, x);
        x.iter_mut().zip(&mu).for_each(|(v, m)| *v -= s * m);
    };
    let prec = SparseCholesky::factor(gram)?;
    let precondition = |r: &Vec<f64>| {
        let mut z = prec.solve(r);
        project(&mut z);
        z
    };
    let mut r = rhs.to_vec();
    project_t(&mut r);
    let mut psi = vec![0.0; r.len()];
    let mut z = precondition(&r);
    let mut rz = dot(&r, &z);
    let tol = 1e-13 * rz.max(0.0).sqrt().max(1e-300);
    if rz.max(0.0).sqrt() <= tol || rz == 0.0 {
        return Ok((psi, rz.max(0.0).sqrt(), 0));
    }
    let mut p = z.clone();
    for it in 1..=MAX_ITER {
        let mut q = b.matvec(&p);
        project_t(&mut q);
        let pq = dot(&p, &q);
        if pq <= 0.0 {
            return Err(Error::IndefiniteAdjoint);
        }
        let alpha = rz / pq;
        psi.iter_mut().zip(&p).for_each(|(x, pi)| *x += alpha * pi);
        r.iter_mut().zip(&q).for_each(|(x, qi)| *x -= alpha * qi);
        z = precondition(&r);
        let rz_new = dot(&r, &z);
        if rz_new.max(0.0).sqrt() <= tol {
            project(&mut psi);
            return Ok((psi, rz_new.max(0.0).sqrt(), it));
        }
        let beta = rz_new / rz;
        rz = rz_new;
        p.iter_mut()
            .zip(&z)
            .for_each(|(pi, zi)| *pi = zi + beta * *pi);
    }
    Err(Error::Convergence {
        iterations: MAX_ITER,
        residual: rz.max(0.0).sqrt(),
        best: Some(psi),
    })
}
