//! Damped self-consistent-field iteration for the discrete ground state.
//!
//! Each step solves the linear eigenproblem with potential `V + f(ρ̃)` and
//! mixes the new density into `ρ̃`:
//! `ρ̃ᵖ = (1 − β) ρ̃ᵖ⁻¹ + β |uᵖ|²`.

mod fem_model;
mod fourier_model;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{build_mesh, FEFunction, FESpace};
use crate::fourier::{FourierCoeffs, PotentialAssembly};
use crate::problem::{Geometry, ProblemSpec};

pub(crate) use fem_model::FemModel;
pub(crate) use fourier_model::FourierModel;

/// Smallest damping the adaptive safeguard will try.
const MIN_DAMPING: f64 = 1.0 / 1024.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SCFConfig {
    /// Bound on `‖ρᵖ − ρ̃ᵖ⁻¹‖_{L²}`.
    pub tol_density: f64,
    /// Bound on `|λᵖ − λᵖ⁻¹|`.
    pub tol_lambda: f64,
    pub max_iter: usize,
    /// Mixing weight `β ∈ (0, 1]`.
    pub damping: f64,
    /// Halve `β` and retry whenever the energy goes up.
    pub adaptive: bool,
    /// Eigensolver tolerance, in units of the dual norm of the residual.
    pub eig_tol: f64,
}

impl Default for SCFConfig {
    fn default() -> Self {
        Self {
            tol_density: 1e-10,
            tol_lambda: 1e-11,
            max_iter: 500,
            damping: 0.3,
            adaptive: true,
            eig_tol: 1e-11,
        }
    }
}

impl SCFConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_density > 0.0 && self.tol_lambda > 0.0 && self.eig_tol > 0.0) {
            return Err(Error::Config("SCF tolerances must be positive".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::Config(format!(
                "damping {} is outside (0, 1]",
                self.damping
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub lambda: f64,
    pub energy: f64,
    /// `‖ρᵖ − ρ̃ᵖ⁻¹‖_{L²}`; absent for the starting state.
    pub density_change: Option<f64>,
    pub damping: f64,
    /// `false` when the adaptive safeguard discarded the step.
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Discretization {
    /// Modes `|k| ≤ n`; `assembly` decides how `V` enters the matrix and
    /// `nonlinear_grid` is the grid used for `f(ρ̃)` when `F` is not
    /// quadratic (default: the smallest FFT size `≥ 4n + 1`).
    Fourier {
        n: usize,
        assembly: PotentialAssembly,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nonlinear_grid: Option<usize>,
    },
    /// Degree-`degree` Lagrange elements on the uniform mesh with `n`
    /// subdivisions per side.
    Fem { n: usize, degree: usize },
}

impl Discretization {
    pub fn fourier(n: usize) -> Self {
        Discretization::Fourier {
            n,
            assembly: PotentialAssembly::Exact,
            nonlinear_grid: None,
        }
    }

    pub fn fourier_grid(n: usize, ng: usize) -> Self {
        Discretization::Fourier {
            n,
            assembly: PotentialAssembly::Grid { ng },
            nonlinear_grid: None,
        }
    }

    pub fn fem(n: usize, degree: usize) -> Self {
        Discretization::Fem { n, degree }
    }

    /// The FE space this discretization describes on `problem`'s domain.
    pub fn fe_space(&self, problem: &ProblemSpec) -> Result<FESpace> {
        match (self, &problem.geometry) {
            (Discretization::Fem { n, degree }, Geometry::DirichletRectangle { sides }) => {
                FESpace::new(build_mesh(sides.len(), sides, *n)?, *degree)
            }
            (Discretization::Fem { .. }, _) => Err(Error::Argument(
                "finite elements need a Dirichlet rectangle".into(),
            )),
            _ => Err(Error::Argument(
                "not a finite-element discretization".into(),
            )),
        }
    }
}

/// A discrete state.
#[derive(Debug, Clone)]
pub enum State {
    Fourier(FourierCoeffs),
    Fem(FEFunction),
}

impl State {
    pub fn as_fourier(&self) -> Option<&FourierCoeffs> {
        match self {
            State::Fourier(u) => Some(u),
            State::Fem(_) => None,
        }
    }

    pub fn as_fem(&self) -> Option<&FEFunction> {
        match self {
            State::Fem(u) => Some(u),
            State::Fourier(_) => None,
        }
    }

    pub fn l2_norm(&self) -> f64 {
        match self {
            State::Fourier(u) => u.l2_norm(),
            State::Fem(u) => u.l2_norm(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub u: State,
    /// Rayleigh value `a(u,u) + ∫ f(u²) u²` of the returned state.
    pub lambda: f64,
    pub energy: f64,
    /// Dual `H¹` norm of the Galerkin residual.
    pub residual: f64,
    pub iterations: usize,
    pub trace: Vec<TraceEntry>,
    pub disc: Discretization,
}

#[derive(Serialize, Deserialize)]
struct SolveResultData {
    lambda: f64,
    energy: f64,
    residual: f64,
    iterations: usize,
    disc: Discretization,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mesh: Option<crate::fem::MeshSpec>,
    u: serde_json::Value,
    trace: Vec<TraceEntry>,
}

impl SolveResult {
    pub fn to_json(&self) -> Result<String> {
        let (u, mesh) = match &self.u {
            State::Fourier(c) => (serde_json::to_value(c)?, None),
            State::Fem(f) => (serde_json::to_value(&f.coeffs)?, Some(f.space.mesh.spec())),
        };
        let data = SolveResultData {
            lambda: self.lambda,
            energy: self.energy,
            residual: self.residual,
            iterations: self.iterations,
            disc: self.disc.clone(),
            mesh,
            u,
            trace: self.trace.clone(),
        };
        Ok(serde_json::to_string_pretty(&data)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let data: SolveResultData = serde_json::from_str(text)?;
        let u = match &data.disc {
            Discretization::Fourier { .. } => State::Fourier(serde_json::from_value(data.u)?),
            Discretization::Fem { degree, .. } => {
                let spec = data
                    .mesh
                    .ok_or_else(|| Error::Config("finite-element result without mesh".into()))?;
                let space = FESpace::new(crate::fem::Mesh::from_spec(&spec)?, *degree)?;
                State::Fem(FEFunction::new(
                    Arc::new(space),
                    serde_json::from_value(data.u)?,
                )?)
            }
        };
        Ok(Self {
            u,
            lambda: data.lambda,
            energy: data.energy,
            residual: data.residual,
            iterations: data.iterations,
            trace: data.trace,
            disc: data.disc,
        })
    }
}

/// What the outer loop needs from a discretization.
pub(crate) trait ScfModel {
    type State: Clone;
    type Density: Clone;

    /// Lowest eigenpair of the operator without the nonlinear term.
    fn initial_state(&mut self) -> Result<(Self::State, f64)>;
    /// Lowest eigenpair of the operator with potential `V + f(ρ̃)`.
    fn lowest_state(
        &mut self,
        rho: &Self::Density,
        warm: Option<(&Self::State, f64)>,
    ) -> Result<(Self::State, f64)>;
    fn density(&self, u: &Self::State) -> Self::Density;
    /// `(1 − β) old + β new`.
    fn mix(&self, old: &Self::Density, new: &Self::Density, beta: f64) -> Self::Density;
    /// `L²` distance between densities.
    fn distance(&self, a: &Self::Density, b: &Self::Density) -> f64;
    fn energy(&self, u: &Self::State) -> f64;
}

pub(crate) struct ScfOutcome<S> {
    pub u: S,
    pub iterations: usize,
    pub trace: Vec<TraceEntry>,
}

pub(crate) fn run_scf<M: ScfModel>(
    model: &mut M,
    cfg: &SCFConfig,
    initial: Option<M::State>,
) -> Result<ScfOutcome<M::State>> {
    cfg.validate()?;
    let (mut u_prev, mut lam_prev) = match initial {
        Some(u) => {
            let rho = model.density(&u);
            model.lowest_state(&rho, Some((&u, f64::NAN)))?
        }
        None => model.initial_state()?,
    };
    let mut e_prev = model.energy(&u_prev);
    let mut trace = vec![TraceEntry {
        iteration: 0,
        lambda: lam_prev,
        energy: e_prev,
        density_change: None,
        damping: cfg.damping,
        accepted: true,
    }];
    let mut rho_in = model.density(&u_prev);
    // Inputs of the last mixing step, kept so it can be redone with a
    // smaller weight.
    let mut rollback: Option<(M::Density, M::Density)> = None;
    let mut beta = cfg.damping;
    // Weights that produced an energy increase are not tried again.
    let mut beta_cap = cfg.damping;
    let mut accepted_steps = 0usize;

    for p in 1..=cfg.max_iter {
        let warm_lambda = if lam_prev.is_finite() {
            lam_prev
        } else {
            f64::NAN
        };
        let (u, lam) = model.lowest_state(&rho_in, Some((&u_prev, warm_lambda)))?;
        let rho_out = model.density(&u);
        let change = model.distance(&rho_out, &rho_in);
        let e = model.energy(&u);

        let increased = e > e_prev + 1e-13 * e_prev.abs().max(1.0);
        if cfg.adaptive && accepted_steps >= 1 && increased && beta / 2.0 >= MIN_DAMPING {
            if let Some((old_in, old_out)) = &rollback {
                beta /= 2.0;
                beta_cap = beta;
                trace.push(TraceEntry {
                    iteration: p,
                    lambda: lam,
                    energy: e,
                    density_change: Some(change),
                    damping: beta,
                    accepted: false,
                });
                rho_in = model.mix(old_in, old_out, beta);
                continue;
            }
        }
        trace.push(TraceEntry {
            iteration: p,
            lambda: lam,
            energy: e,
            density_change: Some(change),
            damping: beta,
            accepted: true,
        });
        accepted_steps += 1;
        if change <= cfg.tol_density && (lam - lam_prev).abs() <= cfg.tol_lambda {
            return Ok(ScfOutcome {
                u,
                iterations: p,
                trace,
            });
        }
        if cfg.adaptive {
            beta = (2.0 * beta).min(beta_cap);
        }
        let next = model.mix(&rho_in, &rho_out, beta);
        rollback = Some((std::mem::replace(&mut rho_in, next), rho_out));
        u_prev = u;
        lam_prev = lam;
        e_prev = e;
    }
    Err(Error::ScfConvergence {
        iterations: cfg.max_iter,
        trace,
    })
}

/// Discrete ground state of `problem` in `disc`.
pub fn solve_ground_state(
    problem: &ProblemSpec,
    disc: &Discretization,
    cfg: &SCFConfig,
) -> Result<SolveResult> {
    solve_ground_state_from(problem, disc, cfg, None)
}

/// As [`solve_ground_state`], starting the iteration from `initial` (which
/// must belong to the same discretization) instead of the linear ground
/// state.
pub fn solve_ground_state_from(
    problem: &ProblemSpec,
    disc: &Discretization,
    cfg: &SCFConfig,
    initial: Option<&State>,
) -> Result<SolveResult> {
    problem.validate()?;
    cfg.validate()?;
    match disc {
        Discretization::Fourier {
            n,
            assembly,
            nonlinear_grid,
        } => {
            if problem.geometry != Geometry::PeriodicInterval {
                return Err(Error::Argument(
                    "the Fourier discretization needs the periodic interval".into(),
                ));
            }
            let mut model = FourierModel::new(problem, *n, *assembly, *nonlinear_grid)?;
            let init = match initial {
                Some(State::Fourier(u)) => Some(u.resized(*n)),
                Some(_) => {
                    return Err(Error::Argument(
                        "initial state is not a Fourier state".into(),
                    ))
                }
                None => None,
            };
            let out = run_scf(&mut model, cfg, init)?;
            let lambda = model.rayleigh(&out.u);
            let residual = model.residual(&out.u, lambda)?;
            Ok(SolveResult {
                energy: model.energy(&out.u),
                u: State::Fourier(out.u),
                lambda,
                residual,
                iterations: out.iterations,
                trace: out.trace,
                disc: disc.clone(),
            })
        }
        Discretization::Fem { .. } => {
            let space = Arc::new(disc.fe_space(problem)?);
            solve_fem(problem, space, cfg, initial.and_then(State::as_fem))
        }
    }
}

/// Finite-element ground state on an existing space. `initial` may live on
/// any space nested in `space`; it is prolongated first.
pub fn solve_fem(
    problem: &ProblemSpec,
    space: Arc<FESpace>,
    cfg: &SCFConfig,
    initial: Option<&FEFunction>,
) -> Result<SolveResult> {
    problem.validate()?;
    let disc = Discretization::Fem {
        n: space.mesh.n,
        degree: space.degree,
    };
    let mut model = FemModel::new(problem, Arc::clone(&space), cfg.eig_tol)?;
    let init = match initial {
        Some(u) => {
            let mut c = u.prolongate(&space)?.coeffs;
            let norm = space.mass().bilinear(&c, &c).sqrt();
            c.iter_mut().for_each(|v| *v /= norm);
            Some(c)
        }
        None => None,
    };
    let out = run_scf(&mut model, cfg, init)?;
    let lambda = model.rayleigh(&out.u);
    let residual = model.residual(&out.u, lambda)?;
    let energy = model.energy(&out.u);
    Ok(SolveResult {
        u: State::Fem(FEFunction::new(space, out.u)?),
        lambda,
        energy,
        residual,
        iterations: out.iterations,
        trace: out.trace,
        disc,
    })
}

/// `E(u)` for a state of `disc`.
pub fn energy(problem: &ProblemSpec, disc: &Discretization, u: &State) -> Result<f64> {
    with_model(problem, disc, u, |m| Ok(m.energy(u)))
}

/// `a(u,u) + ∫ f(u²) u²`.
pub fn rayleigh_value(problem: &ProblemSpec, disc: &Discretization, u: &State) -> Result<f64> {
    with_model(problem, disc, u, |m| Ok(m.rayleigh(u)))
}

/// Dual `H¹` norm of the projection of `A_u u − λ u` onto the space.
pub fn residual_norm(
    problem: &ProblemSpec,
    disc: &Discretization,
    u: &State,
    lambda: f64,
) -> Result<f64> {
    with_model(problem, disc, u, |m| m.residual(u, lambda))
}

enum AnyModel {
    Fourier(FourierModel),
    Fem(FemModel),
}

impl AnyModel {
    fn energy(&self, u: &State) -> f64 {
        match (self, u) {
            (AnyModel::Fourier(m), State::Fourier(u)) => m.energy(u),
            (AnyModel::Fem(m), State::Fem(u)) => m.energy(&u.coeffs),
            _ => unreachable!("state matched to model"),
        }
    }

    fn rayleigh(&self, u: &State) -> f64 {
        match (self, u) {
            (AnyModel::Fourier(m), State::Fourier(u)) => m.rayleigh(u),
            (AnyModel::Fem(m), State::Fem(u)) => m.rayleigh(&u.coeffs),
            _ => unreachable!("state matched to model"),
        }
    }

    fn residual(&self, u: &State, lambda: f64) -> Result<f64> {
        match (self, u) {
            (AnyModel::Fourier(m), State::Fourier(u)) => m.residual(u, lambda),
            (AnyModel::Fem(m), State::Fem(u)) => m.residual(&u.coeffs, lambda),
            _ => unreachable!("state matched to model"),
        }
    }
}

fn with_model<T>(
    problem: &ProblemSpec,
    disc: &Discretization,
    u: &State,
    f: impl FnOnce(&AnyModel) -> Result<T>,
) -> Result<T> {
    let model = match (disc, u) {
        (
            Discretization::Fourier {
                n,
                assembly,
                nonlinear_grid,
            },
            State::Fourier(c),
        ) => {
            if c.cutoff() != *n {
                return Err(Error::Argument(format!(
                    "state has cutoff {} but the discretization {}",
                    c.cutoff(),
                    n
                )));
            }
            AnyModel::Fourier(FourierModel::new(problem, *n, *assembly, *nonlinear_grid)?)
        }
        (Discretization::Fem { .. }, State::Fem(fe)) => AnyModel::Fem(FemModel::new(
            problem,
            Arc::clone(&fe.space),
            SCFConfig::default().eig_tol,
        )?),
        _ => {
            return Err(Error::Argument(
                "state does not belong to the discretization".into(),
            ))
        }
    };
    f(&model)
}
