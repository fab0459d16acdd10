use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::Norm;
use crate::scf::{SolveResult, State};

/// `u_δ` expressed in the reference discretization, flipped so that
/// `⟨u_δ, u_ref⟩_{L²} ≥ 0`.
pub fn align(u_delta: &State, u_ref: &State) -> Result<State> {
    match (u_delta, u_ref) {
        (State::Fourier(d), State::Fourier(r)) => {
            if d.cutoff() > r.cutoff() {
                return Err(Error::Precondition(format!(
                    "reference cutoff {} is below the state's {}",
                    r.cutoff(),
                    d.cutoff()
                )));
            }
            let mut d = d.resized(r.cutoff());
            if d.inner(r).re < 0.0 {
                d.scale(-1.0);
            }
            Ok(State::Fourier(d))
        }
        (State::Fem(d), State::Fem(r)) => {
            let mut p = d.prolongate(&r.space)?;
            if r.space.mass().bilinear(&p.coeffs, &r.coeffs) < 0.0 {
                p.coeffs.iter_mut().for_each(|v| *v = -*v);
            }
            Ok(State::Fem(p))
        }
        _ => Err(Error::Argument(
            "states come from different discretization families".into(),
        )),
    }
}

/// `‖u_δ − u_ref‖` in each norm, after the sign convention. `H⁻¹` is only
/// available for Fourier states.
pub fn error_norms(u_delta: &State, u_ref: &State, norms: &[Norm]) -> Result<Vec<f64>> {
    if matches!(u_delta, State::Fem(_)) {
        if let Some(n) = norms.iter().find(|n| **n == Norm::Hm1) {
            return Err(Error::UnsupportedNorm(n.name()));
        }
    }
    match (align(u_delta, u_ref)?, u_ref) {
        (State::Fourier(d), State::Fourier(r)) => {
            let e = d.sub(r);
            Ok(norms
                .iter()
                .map(|n| match n {
                    Norm::H1 => e.sobolev_norm(1.0),
                    Norm::L2 => e.l2_norm(),
                    Norm::Hm1 => e.sobolev_norm(-1.0),
                })
                .collect())
        }
        (State::Fem(d), State::Fem(r)) => crate::fem::fe_error_norms(&d, r, norms),
        _ => unreachable!("align keeps the family"),
    }
}

/// Errors of one solve against a reference solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSummary {
    pub h1: f64,
    pub l2: f64,
    pub hm1: Option<f64>,
    /// `λ_δ − λ_ref`.
    pub lambda: f64,
    /// `E(u_δ) − E(u_ref)`.
    pub energy: f64,
}

pub fn compare(delta: &SolveResult, reference: &SolveResult) -> Result<ErrorSummary> {
    let fourier = matches!(delta.u, State::Fourier(_));
    let norms: &[Norm] = if fourier {
        &[Norm::H1, Norm::L2, Norm::Hm1]
    } else {
        &[Norm::H1, Norm::L2]
    };
    let v = error_norms(&delta.u, &reference.u, norms)?;
    Ok(ErrorSummary {
        h1: v[0],
        l2: v[1],
        hm1: v.get(2).copied(),
        lambda: delta.lambda - reference.lambda,
        energy: delta.energy - reference.energy,
    })
}
