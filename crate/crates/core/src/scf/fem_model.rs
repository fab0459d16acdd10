use std::sync::Arc;

use super::ScfModel;
use crate::eigsolve::{lowest_eigenpair, EigOptions, SymOp, DENSE_LIMIT};
use crate::error::Result;
use crate::fem::{assemble_weighted_mass, potential_at_qps, FESpace};
use crate::problem::{Nonlinearity, ProblemSpec};
use crate::sparse::{CholeskyAnalysis, CsrMatrix, SparseCholesky};

/// Finite-element model; densities live at the quadrature points.
pub(crate) struct FemModel {
    pub(crate) space: Arc<FESpace>,
    pub(crate) nl: Nonlinearity,
    pub(crate) weights: Vec<f64>,
    /// Stiffness plus `V`-weighted mass.
    pub(crate) base: CsrMatrix,
    analysis: Option<Arc<CholeskyAnalysis>>,
    eig_tol: f64,
}

impl FemModel {
    pub fn new(problem: &ProblemSpec, space: Arc<FESpace>, eig_tol: f64) -> Result<Self> {
        let v = potential_at_qps(&space, &problem.potential);
        let base = space
            .stiffness()
            .add_scaled(1.0, &assemble_weighted_mass(&space, &v)?)?;
        let analysis = if space.dof_count() > DENSE_LIMIT {
            Some(Arc::new(CholeskyAnalysis::new(&base)?))
        } else {
            None
        };
        // The Euclidean residual of a unit-L² vector scales like the dof
        // spacing to the power d/2; below a rounding floor it cannot drop.
        let d = space.dim() as i32;
        let spacing = space
            .mesh
            .sides
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
            / (space.mesh.n * space.degree) as f64;
        let row_max = (0..base.nrows())
            .map(|i| base.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let floor = 64.0 * f64::EPSILON * row_max * (base.nrows() as f64).sqrt()
            / space.mesh.measure().sqrt();
        let eig_tol = (eig_tol * spacing.powf(d as f64 / 2.0)).max(floor);
        Ok(Self {
            weights: space.qp_weights(),
            space,
            nl: problem.nonlinearity,
            base,
            analysis,
            eig_tol,
        })
    }

    fn operator(&self, rho: &[f64]) -> Result<CsrMatrix> {
        if self.nl.is_linear() {
            return Ok(self.base.clone());
        }
        let w: Vec<f64> = rho.iter().map(|r| self.nl.f(r.max(0.0))).collect();
        self.base
            .add_scaled(1.0, &assemble_weighted_mass(&self.space, &w)?)
    }

    fn eigen(&self, h: &CsrMatrix, warm: Option<(&Vec<f64>, f64)>) -> Result<(Vec<f64>, f64)> {
        let opts = EigOptions {
            tol: self.eig_tol,
            x0: warm.map(|(u, _)| u.clone()),
            shift: warm.map(|(_, l)| l - 1.0).filter(|s| s.is_finite()),
            analysis: self.analysis.clone(),
            max_iter: 2000,
            ..EigOptions::default()
        };
        let r = lowest_eigenpair(
            SymOp::Sparse(h),
            Some(SymOp::Sparse(self.space.mass())),
            &opts,
        )?;
        let mut u = r.vector;
        self.fix_sign(&mut u);
        Ok((u, r.lambda))
    }

    pub fn fix_sign(&self, u: &mut [f64]) {
        let values = self.space.eval_at_qps(u);
        let mean: f64 = values.iter().zip(&self.weights).map(|(v, w)| v * w).sum();
        let pivot = if mean.abs() > 1e-14 {
            mean
        } else {
            u.iter()
                .copied()
                .max_by(|a, b| a.abs().total_cmp(&b.abs()))
                .unwrap_or(0.0)
        };
        if pivot < 0.0 {
            u.iter_mut().for_each(|v| *v = -*v);
        }
    }

    /// `(∫ F(u²), ∫ f(u²) u²)` by element quadrature.
    fn nonlinear_integrals(&self, u: &[f64]) -> (f64, f64) {
        if self.nl.is_linear() {
            return (0.0, 0.0);
        }
        self.space
            .eval_at_qps(u)
            .iter()
            .zip(&self.weights)
            .fold((0.0, 0.0), |(a, b), (v, w)| {
                let r = v * v;
                (a + w * self.nl.big_f(r), b + w * self.nl.f(r) * r)
            })
    }

    pub fn rayleigh(&self, u: &[f64]) -> f64 {
        self.base.bilinear(u, u) + self.nonlinear_integrals(u).1
    }

    /// Dual `H¹` norm of the Galerkin residual: `(rᵀ (K + M)⁻¹ r)^{1/2}`
    /// with `r = A_u u − λ M u`.
    pub fn residual(&self, u: &[f64], lambda: f64) -> Result<f64> {
        let h = self.operator(&self.density(&u.to_vec()))?;
        let mu = self.space.mass().matvec(u);
        let r: Vec<f64> = h
            .matvec(u)
            .iter()
            .zip(&mu)
            .map(|(a, b)| a - lambda * b)
            .collect();
        let gram = self.space.stiffness().add_scaled(1.0, self.space.mass())?;
        let z = SparseCholesky::factor(&gram)?.solve(&r);
        Ok(r.iter()
            .zip(&z)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            .max(0.0)
            .sqrt())
    }
}

impl ScfModel for FemModel {
    type State = Vec<f64>;
    type Density = Vec<f64>;

    fn initial_state(&mut self) -> Result<(Vec<f64>, f64)> {
        self.eigen(&self.base, None)
    }

    fn lowest_state(
        &mut self,
        rho: &Vec<f64>,
        warm: Option<(&Vec<f64>, f64)>,
    ) -> Result<(Vec<f64>, f64)> {
        let h = self.operator(rho)?;
        self.eigen(&h, warm)
    }

    fn density(&self, u: &Vec<f64>) -> Vec<f64> {
        self.space.eval_at_qps(u).iter().map(|v| v * v).collect()
    }

    fn mix(&self, old: &Vec<f64>, new: &Vec<f64>, beta: f64) -> Vec<f64> {
        old.iter()
            .zip(new)
            .map(|(a, b)| (1.0 - beta) * a + beta * b)
            .collect()
    }

    fn distance(&self, a: &Vec<f64>, b: &Vec<f64>) -> f64 {
        a.iter()
            .zip(b)
            .zip(&self.weights)
            .map(|((x, y), w)| w * (x - y).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    fn energy(&self, u: &Vec<f64>) -> f64 {
        0.5 * self.base.bilinear(u, u) + 0.5 * self.nonlinear_integrals(u).0
    }
}
