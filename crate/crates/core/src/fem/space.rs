use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::fem::mesh::Mesh;
use crate::fem::quadrature::{simplex_rule, QuadratureRule};
use crate::sparse::CsrMatrix;

const ELIMINATED: usize = usize::MAX;

/// Continuous P1 or P2 Lagrange space on a uniform [`Mesh`].
///
/// Nodes sit on the lattice of spacing `h / degree` and are numbered
/// lexicographically; dofs follow the node order, skipping boundary nodes
/// when Dirichlet conditions are eliminated.
#[derive(Debug)]
pub struct FESpace {
    pub mesh: Mesh,
    pub degree: usize,
    /// Boundary nodes eliminated (homogeneous Dirichlet conditions).
    pub dirichlet: bool,
    /// Per lattice node.
    pub boundary_mask: Vec<bool>,
    m: usize,
    node_dof: Vec<usize>,
    dof_node: Vec<usize>,
    elem_nodes: Vec<usize>,
    rule: QuadratureRule,
    phi: Vec<f64>,
    dphi: Vec<f64>,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    scatter: Vec<usize>,
    stiffness: OnceLock<CsrMatrix>,
    mass: OnceLock<CsrMatrix>,
}

/// Values and reference gradients of the local basis at `r`.
pub(crate) fn local_basis(d: usize, degree: usize, r: &[f64], phi: &mut [f64], dphi: &mut [f64]) {
    let (lam, dlam): (Vec<f64>, Vec<[f64; 2]>) = if d == 1 {
        (vec![1.0 - r[0], r[0]], vec![[-1.0, 0.0], [1.0, 0.0]])
    } else {
        (
            vec![1.0 - r[0] - r[1], r[0], r[1]],
            vec![[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]],
        )
    };
    let mut put = |a: usize, v: f64, g: [f64; 2]| {
        phi[a] = v;
        dphi[a * d..(a + 1) * d].copy_from_slice(&g[..d]);
    };
    let nv = d + 1;
    if degree == 1 {
        for a in 0..nv {
            put(a, lam[a], dlam[a]);
        }
        return;
    }
    for a in 0..nv {
        let s = 4.0 * lam[a] - 1.0;
        put(
            a,
            lam[a] * (2.0 * lam[a] - 1.0),
            [s * dlam[a][0], s * dlam[a][1]],
        );
    }
    let edges: &[(usize, usize)] = if d == 1 {
        &[(0, 1)]
    } else {
        &[(0, 1), (1, 2), (0, 2)]
    };
    for (k, &(a, b)) in edges.iter().enumerate() {
        let g = [
            4.0 * (lam[a] * dlam[b][0] + lam[b] * dlam[a][0]),
            4.0 * (lam[a] * dlam[b][1] + lam[b] * dlam[a][1]),
        ];
        put(nv + k, 4.0 * lam[a] * lam[b], g);
    }
}

/// Affine map of an element: origin, Jacobian columns, `|det J|` and the
/// inverse transpose (row-major, `d × d`).
pub(crate) struct ElementMap {
    pub origin: [f64; 2],
    pub jac: [[f64; 2]; 2],
    pub det: f64,
    pub inv_t: [[f64; 2]; 2],
}

impl FESpace {
    /// Space with boundary dofs eliminated.
    pub fn new(mesh: Mesh, degree: usize) -> Result<Self> {
        Self::build(mesh, degree, true)
    }

    /// Space keeping every node, including those on the boundary.
    pub fn with_boundary(mesh: Mesh, degree: usize) -> Result<Self> {
        Self::build(mesh, degree, false)
    }

    fn build(mesh: Mesh, degree: usize, dirichlet: bool) -> Result<Self> {
        if !(1..=2).contains(&degree) {
            return Err(Error::Argument(format!(
                "FE degree must be 1 or 2, got {degree}"
            )));
        }
        let d = mesh.d;
        let m = degree * mesh.n;
        let per_side = m + 1;
        let node_count = per_side.pow(d as u32);
        let boundary_mask: Vec<bool> = (0..node_count)
            .map(|p| {
                let on = |c: usize| c == 0 || c == m;
                if d == 1 {
                    on(p)
                } else {
                    on(p % per_side) || on(p / per_side)
                }
            })
            .collect();
        let mut node_dof = vec![ELIMINATED; node_count];
        let mut dof_node = Vec::new();
        for p in 0..node_count {
            if !(dirichlet && boundary_mask[p]) {
                node_dof[p] = dof_node.len();
                dof_node.push(p);
            }
        }

        let nloc = local_count(d, degree);
        let nv = mesh.n + 1;
        let grid = |v: usize| if d == 1 { [v, 0] } else { [v % nv, v / nv] };
        let node = |c: [usize; 2]| c[0] + per_side * c[1];
        let mut elem_nodes = Vec::with_capacity(mesh.element_count() * nloc);
        for e in 0..mesh.element_count() {
            let verts: Vec<[usize; 2]> = mesh.element(e).iter().map(|&v| grid(v)).collect();
            for g in &verts {
                elem_nodes.push(node([degree * g[0], degree * g[1]]));
            }
            if degree == 2 {
                let edges: &[(usize, usize)] = if d == 1 {
                    &[(0, 1)]
                } else {
                    &[(0, 1), (1, 2), (0, 2)]
                };
                for &(a, b) in edges {
                    elem_nodes.push(node([verts[a][0] + verts[b][0], verts[a][1] + verts[b][1]]));
                }
            }
        }

        let rule = simplex_rule(d, 4 * degree + 2)?;
        let mut phi = vec![0.0; rule.len() * nloc];
        let mut dphi = vec![0.0; rule.len() * nloc * d];
        for q in 0..rule.len() {
            local_basis(
                d,
                degree,
                rule.point(q),
                &mut phi[q * nloc..(q + 1) * nloc],
                &mut dphi[q * nloc * d..(q + 1) * nloc * d],
            );
        }

        let mut space = Self {
            mesh,
            degree,
            dirichlet,
            boundary_mask,
            m,
            node_dof,
            dof_node,
            elem_nodes,
            rule,
            phi,
            dphi,
            row_ptr: Vec::new(),
            col_idx: Vec::new(),
            scatter: Vec::new(),
            stiffness: OnceLock::new(),
            mass: OnceLock::new(),
        };
        space.build_pattern();
        Ok(space)
    }

    fn build_pattern(&mut self) {
        let nloc = self.local_count();
        let ndof = self.dof_count();
        let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(self.elem_nodes.len() * nloc);
        for nodes in self.elem_nodes.chunks(nloc) {
            for &a in nodes {
                for &b in nodes {
                    let (i, j) = (self.node_dof[a], self.node_dof[b]);
                    if i != ELIMINATED && j != ELIMINATED {
                        pairs.push((i, j));
                    }
                }
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        let mut row_ptr = vec![0usize; ndof + 1];
        for &(i, _) in &pairs {
            row_ptr[i + 1] += 1;
        }
        for i in 0..ndof {
            row_ptr[i + 1] += row_ptr[i];
        }
        let col_idx: Vec<usize> = pairs.iter().map(|&(_, j)| j).collect();
        let mut scatter = Vec::with_capacity(self.elem_nodes.len() * nloc);
        for nodes in self.elem_nodes.chunks(nloc) {
            for &a in nodes {
                for &b in nodes {
                    let (i, j) = (self.node_dof[a], self.node_dof[b]);
                    scatter.push(if i == ELIMINATED || j == ELIMINATED {
                        ELIMINATED
                    } else {
                        let row = &col_idx[row_ptr[i]..row_ptr[i + 1]];
                        row_ptr[i] + row.binary_search(&j).expect("pattern entry")
                    });
                }
            }
        }
        self.row_ptr = row_ptr;
        self.col_idx = col_idx;
        self.scatter = scatter;
    }

    pub fn dim(&self) -> usize {
        self.mesh.d
    }

    pub fn dof_count(&self) -> usize {
        self.dof_node.len()
    }

    pub fn local_count(&self) -> usize {
        local_count(self.mesh.d, self.degree)
    }

    pub fn element_count(&self) -> usize {
        self.mesh.element_count()
    }

    pub fn quad_points_per_element(&self) -> usize {
        self.rule.len()
    }

    /// Size of a quadrature-point field, laid out `[element][point]`.
    pub fn qp_count(&self) -> usize {
        self.element_count() * self.rule.len()
    }

    fn node_coord(&self, p: usize) -> [f64; 2] {
        let per_side = self.m + 1;
        let (i, j) = if self.mesh.d == 1 {
            (p, 0)
        } else {
            (p % per_side, p / per_side)
        };
        let y = if self.mesh.d == 2 {
            j as f64 * self.mesh.sides[1] / self.m as f64
        } else {
            0.0
        };
        [i as f64 * self.mesh.sides[0] / self.m as f64, y]
    }

    /// Coordinates of dof `i`; the second entry is zero in 1D.
    pub fn dof_coord(&self, i: usize) -> [f64; 2] {
        self.node_coord(self.dof_node[i])
    }

    /// All dof coordinates with stride `d`.
    pub fn dof_coords(&self) -> Vec<f64> {
        let d = self.mesh.d;
        (0..self.dof_count())
            .flat_map(|i| self.dof_coord(i).into_iter().take(d))
            .collect()
    }

    /// Dof numbers of the local nodes of element `e` (`None` if eliminated).
    pub fn element_dofs(&self, e: usize) -> impl Iterator<Item = Option<usize>> + '_ {
        let nloc = self.local_count();
        self.elem_nodes[e * nloc..(e + 1) * nloc]
            .iter()
            .map(|&p| Some(self.node_dof[p]).filter(|&i| i != ELIMINATED))
    }

    pub(crate) fn element_map(&self, e: usize) -> ElementMap {
        let v = self.mesh.element(e);
        let d = self.mesh.d;
        let p0 = self.mesh.vertex(v[0]);
        if d == 1 {
            let a = self.mesh.vertex(v[1])[0] - p0[0];
            return ElementMap {
                origin: [p0[0], 0.0],
                jac: [[a, 0.0], [0.0, 1.0]],
                det: a.abs(),
                inv_t: [[1.0 / a, 0.0], [0.0, 1.0]],
            };
        }
        let (p1, p2) = (self.mesh.vertex(v[1]), self.mesh.vertex(v[2]));
        let (a, c) = (p1[0] - p0[0], p1[1] - p0[1]);
        let (b, dd) = (p2[0] - p0[0], p2[1] - p0[1]);
        let det = a * dd - b * c;
        ElementMap {
            origin: [p0[0], p0[1]],
            jac: [[a, b], [c, dd]],
            det: det.abs(),
            inv_t: [[dd / det, -c / det], [-b / det, a / det]],
        }
    }

    /// Reference basis values at quadrature point `q`.
    pub(crate) fn phi_at(&self, q: usize) -> &[f64] {
        let nloc = self.local_count();
        &self.phi[q * nloc..(q + 1) * nloc]
    }

    pub(crate) fn dphi_at(&self, q: usize) -> &[f64] {
        let k = self.local_count() * self.mesh.d;
        &self.dphi[q * k..(q + 1) * k]
    }

    pub(crate) fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub(crate) fn scatter(&self, e: usize) -> &[usize] {
        let k = self.local_count().pow(2);
        &self.scatter[e * k..(e + 1) * k]
    }

    pub(crate) fn pattern_nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub(crate) fn matrix_with_values(&self, values: Vec<f64>) -> CsrMatrix {
        let n = self.dof_count();
        CsrMatrix::from_parts(n, n, self.row_ptr.clone(), self.col_idx.clone(), values)
    }

    /// Physical coordinates of every quadrature point, stride `d`.
    pub fn qp_coords(&self) -> Vec<f64> {
        let d = self.mesh.d;
        let mut out = Vec::with_capacity(self.qp_count() * d);
        for e in 0..self.element_count() {
            let map = self.element_map(e);
            for q in 0..self.rule.len() {
                let r = self.rule.point(q);
                for k in 0..d {
                    let mut x = map.origin[k];
                    for (l, rl) in r.iter().enumerate() {
                        x += map.jac[k][l] * rl;
                    }
                    out.push(x);
                }
            }
        }
        out
    }

    /// Quadrature weights times `|det J|`, so that `Σ w g(x_q) ≈ ∫ g`.
    pub fn qp_weights(&self) -> Vec<f64> {
        (0..self.element_count())
            .flat_map(|e| {
                let det = self.element_map(e).det;
                self.rule.weights.iter().map(move |w| w * det)
            })
            .collect()
    }

    /// Values of the FE function with dof vector `coeffs` at every
    /// quadrature point.
    pub fn eval_at_qps(&self, coeffs: &[f64]) -> Vec<f64> {
        let nq = self.rule.len();
        let mut out = Vec::with_capacity(self.qp_count());
        let mut local = vec![0.0; self.local_count()];
        for e in 0..self.element_count() {
            for (slot, dof) in local.iter_mut().zip(self.element_dofs(e)) {
                *slot = dof.map_or(0.0, |i| coeffs[i]);
            }
            for q in 0..nq {
                out.push(self.phi_at(q).iter().zip(&local).map(|(p, c)| p * c).sum());
            }
        }
        out
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        let d = self.mesh.d;
        (0..self.dof_count())
            .map(|i| f(&self.dof_coord(i)[..d]))
            .collect()
    }

    /// Point evaluation of the FE function with dof vector `coeffs`.
    pub fn eval(&self, coeffs: &[f64], x: &[f64]) -> f64 {
        let (e, r) = self.mesh.locate(x);
        let nloc = self.local_count();
        let mut phi = [0.0; 6];
        let mut dphi = [0.0; 12];
        local_basis(
            self.mesh.d,
            self.degree,
            &r[..self.mesh.d],
            &mut phi[..nloc],
            &mut dphi[..nloc * self.mesh.d],
        );
        self.element_dofs(e)
            .zip(&phi[..nloc])
            .map(|(dof, p)| dof.map_or(0.0, |i| coeffs[i]) * p)
            .sum()
    }

    /// Stiffness matrix `∫ ∇φ_i · ∇φ_j`, assembled once and cached.
    pub fn stiffness(&self) -> &CsrMatrix {
        self.stiffness
            .get_or_init(|| crate::fem::assembly::assemble_stiffness(self))
    }

    /// Mass matrix `∫ φ_i φ_j`, assembled once and cached.
    pub fn mass(&self) -> &CsrMatrix {
        self.mass
            .get_or_init(|| crate::fem::assembly::assemble_mass(self))
    }

    /// Whether functions of `coarse` are exactly representable here.
    pub fn contains(&self, coarse: &FESpace) -> bool {
        self.mesh.refinement_factor(&coarse.mesh).is_some()
            && self.degree >= coarse.degree
            && (coarse.dirichlet || !self.dirichlet)
    }
}

fn local_count(d: usize, degree: usize) -> usize {
    match (d, degree) {
        (1, 1) => 2,
        (1, _) => 3,
        (_, 1) => 3,
        _ => 6,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::mesh::build_mesh;
    use std::f64::consts::PI;

    #[test]
    fn dof_counts() {
        let m = build_mesh(2, &[1.0, 1.0], 4).unwrap();
        assert_eq!(FESpace::new(m.clone(), 1).unwrap().dof_count(), 9);
        assert_eq!(FESpace::new(m.clone(), 2).unwrap().dof_count(), 49);
        assert_eq!(FESpace::with_boundary(m, 2).unwrap().dof_count(), 81);
        let m = build_mesh(1, &[PI], 8).unwrap();
        assert_eq!(FESpace::new(m, 2).unwrap().dof_count(), 15);
    }

    #[test]
    fn retained_dofs_are_interior_and_ordered() {
        let s = FESpace::new(build_mesh(2, &[2.0, 1.0], 3).unwrap(), 2).unwrap();
        let mut last = (-1.0, -1.0);
        for i in 0..s.dof_count() {
            let [x, y] = s.dof_coord(i);
            assert!(x > 0.0 && x < 2.0 && y > 0.0 && y < 1.0);
            assert!((y, x) > last);
            last = (y, x);
        }
    }

    #[test]
    fn basis_is_nodal() {
        for (d, degree) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            let s =
                FESpace::with_boundary(build_mesh(d, &vec![1.3; d], 2).unwrap(), degree).unwrap();
            for i in 0..s.dof_count() {
                let mut c = vec![0.0; s.dof_count()];
                c[i] = 1.0;
                for j in 0..s.dof_count() {
                    let v = s.eval(&c, &s.dof_coord(j)[..d]);
                    assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn quadratics_reproduced_by_p2() {
        let s = FESpace::with_boundary(build_mesh(2, &[1.0, 2.0], 3).unwrap(), 2).unwrap();
        let f = |x: &[f64]| 1.0 + x[0] - 2.0 * x[1] + x[0] * x[1] + 0.5 * x[1] * x[1];
        let c = s.interpolate(f);
        for x in [[0.13, 0.77], [0.5, 1.9], [0.99, 0.01]] {
            assert!((s.eval(&c, &x) - f(&x)).abs() < 1e-13);
        }
        let at_qps = s.eval_at_qps(&c);
        let coords = s.qp_coords();
        for (q, v) in at_qps.iter().enumerate() {
            assert!((v - f(&coords[2 * q..2 * q + 2])).abs() < 1e-13);
        }
    }
}
