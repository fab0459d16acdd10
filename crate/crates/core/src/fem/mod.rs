//! Continuous P1/P2 finite elements on uniform triangulations of rectangles
//! with homogeneous Dirichlet conditions.

pub mod assembly;
pub mod function;
pub mod mesh;
pub mod quadrature;
pub mod space;

pub use assembly::{assemble_mass, assemble_stiffness, assemble_weighted_mass, potential_at_qps};
pub use function::{fe_error_norms, prolongate, FEFunction};
pub use mesh::{build_mesh, Mesh, MeshSpec};
pub use quadrature::{gauss_legendre, simplex_rule, QuadratureRule};
pub use space::FESpace;
