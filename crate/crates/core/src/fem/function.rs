use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::mesh::{Mesh, MeshSpec};
use crate::fem::space::FESpace;
use crate::problem::Norm;

/// A finite-element function: a space and its dof vector.
#[derive(Debug, Clone)]
pub struct FEFunction {
    pub space: Arc<FESpace>,
    pub coeffs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct FEFunctionData {
    mesh: MeshSpec,
    degree: usize,
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    dirichlet: bool,
    coeffs: Vec<f64>,
}

fn yes() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

impl FEFunction {
    pub fn new(space: Arc<FESpace>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.dof_count() {
            return Err(Error::Argument(format!(
                "{} coefficients for a space with {} dofs",
                coeffs.len(),
                space.dof_count()
            )));
        }
        Ok(Self { space, coeffs })
    }

    pub fn zeros(space: Arc<FESpace>) -> Self {
        let coeffs = vec![0.0; space.dof_count()];
        Self { space, coeffs }
    }

    pub fn interpolate(space: Arc<FESpace>, f: impl Fn(&[f64]) -> f64) -> Self {
        let coeffs = space.interpolate(f);
        Self { space, coeffs }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.space.eval(&self.coeffs, x)
    }

    pub fn l2_norm(&self) -> f64 {
        self.space
            .mass()
            .bilinear(&self.coeffs, &self.coeffs)
            .sqrt()
    }

    /// `‖v‖²_{L²} + ‖∇v‖²_{L²}`, square-rooted.
    pub fn h1_norm(&self) -> f64 {
        let m = self.space.mass().bilinear(&self.coeffs, &self.coeffs);
        let k = self.space.stiffness().bilinear(&self.coeffs, &self.coeffs);
        (m + k).sqrt()
    }

    /// Exact representation of `self` in a nested finer space.
    pub fn prolongate(&self, fine: &Arc<FESpace>) -> Result<FEFunction> {
        if !fine.contains(&self.space) {
            return Err(Error::Precondition(format!(
                "P{} space on n = {} is not nested in P{} space on n = {}",
                self.space.degree, self.space.mesh.n, fine.degree, fine.mesh.n
            )));
        }
        let d = fine.dim();
        let coeffs = (0..fine.dof_count())
            .map(|i| self.eval(&fine.dof_coord(i)[..d]))
            .collect();
        Ok(FEFunction {
            space: Arc::clone(fine),
            coeffs,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let data = FEFunctionData {
            mesh: self.space.mesh.spec(),
            degree: self.space.degree,
            dirichlet: self.space.dirichlet,
            coeffs: self.coeffs.clone(),
        };
        Ok(serde_json::to_string(&data)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let data: FEFunctionData = serde_json::from_str(text)?;
        let mesh = Mesh::from_spec(&data.mesh)?;
        let space = if data.dirichlet {
            FESpace::new(mesh, data.degree)?
        } else {
            FESpace::with_boundary(mesh, data.degree)?
        };
        Self::new(Arc::new(space), data.coeffs)
    }
}

/// Prolongation onto a nested finer space.
pub fn prolongate(u: &FEFunction, fine: &Arc<FESpace>) -> Result<FEFunction> {
    u.prolongate(fine)
}

/// `‖u_ref − u_h‖` in each requested norm, computed on the reference space
/// after prolongating `u_h`. No sign convention is applied.
pub fn fe_error_norms(u_h: &FEFunction, u_ref: &FEFunction, norms: &[Norm]) -> Result<Vec<f64>> {
    if let Some(n) = norms.iter().find(|n| **n == Norm::Hm1) {
        return Err(Error::UnsupportedNorm(n.name()));
    }
    let p = u_h.prolongate(&u_ref.space)?;
    let e: Vec<f64> = u_ref
        .coeffs
        .iter()
        .zip(&p.coeffs)
        .map(|(a, b)| a - b)
        .collect();
    let space = &u_ref.space;
    let l2sq = space.mass().bilinear(&e, &e);
    Ok(norms
        .iter()
        .map(|n| match n {
            Norm::L2 => l2sq.max(0.0).sqrt(),
            _ => (l2sq + space.stiffness().bilinear(&e, &e)).max(0.0).sqrt(),
        })
        .collect())
}
