use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform mesh of `(0, s₁) × … × (0, s_d)`, `d ∈ {1, 2}`.
///
/// Vertices are numbered lexicographically with `x₁` fastest. In 2D each
/// cell `[v00, v10, v11, v01]` is cut along the `v00–v11` diagonal into
/// `(v00, v10, v11)` and `(v00, v11, v01)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub d: usize,
    pub sides: Vec<f64>,
    pub n: usize,
    /// Coordinates with stride `d`.
    pub vertices: Vec<f64>,
    /// Vertex indices with stride `d + 1`.
    pub elements: Vec<usize>,
    /// Largest element diameter.
    pub h: f64,
}

/// The parameters a [`Mesh`] is built from; its JSON form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshSpec {
    pub d: usize,
    pub sides: Vec<f64>,
    pub n: usize,
}

pub fn build_mesh(d: usize, sides: &[f64], n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::Argument(
            "mesh needs at least one subdivision".into(),
        ));
    }
    if !(1..=2).contains(&d) || sides.len() != d {
        return Err(Error::Argument(format!(
            "mesh dimension {d} with {} side lengths",
            sides.len()
        )));
    }
    if sides.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::Argument("mesh sides must be positive".into()));
    }
    let steps: Vec<f64> = sides.iter().map(|s| s / n as f64).collect();
    let (vertices, elements) = if d == 1 {
        let v = (0..=n).map(|i| i as f64 * steps[0]).collect();
        let e = (0..n).flat_map(|i| [i, i + 1]).collect();
        (v, e)
    } else {
        let mut v = Vec::with_capacity(2 * (n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                v.extend([i as f64 * steps[0], j as f64 * steps[1]]);
            }
        }
        let id = |i: usize, j: usize| i + (n + 1) * j;
        let mut e = Vec::with_capacity(6 * n * n);
        for j in 0..n {
            for i in 0..n {
                e.extend([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                e.extend([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        (v, e)
    };
    let h = steps.iter().map(|s| s * s).sum::<f64>().sqrt();
    Ok(Mesh {
        d,
        sides: sides.to_vec(),
        n,
        vertices,
        elements,
        h,
    })
}

impl Mesh {
    pub fn from_spec(spec: &MeshSpec) -> Result<Self> {
        build_mesh(spec.d, &spec.sides, spec.n)
    }

    pub fn spec(&self) -> MeshSpec {
        MeshSpec {
            d: self.d,
            sides: self.sides.clone(),
            n: self.n,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len() / self.d
    }

    pub fn element_count(&self) -> usize {
        self.elements.len() / (self.d + 1)
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.vertices[i * self.d..(i + 1) * self.d]
    }

    pub fn element(&self, e: usize) -> &[usize] {
        let k = self.d + 1;
        &self.elements[e * k..(e + 1) * k]
    }

    pub fn measure(&self) -> f64 {
        self.sides.iter().product()
    }

    /// Mesh with every cell split into `factor^d` congruent cells.
    pub fn refine(&self, factor: usize) -> Result<Mesh> {
        build_mesh(self.d, &self.sides, self.n * factor)
    }

    /// `Some(factor)` when `self` is a uniform refinement of `coarse`.
    pub fn refinement_factor(&self, coarse: &Mesh) -> Option<usize> {
        let same_domain = self.d == coarse.d
            && self
                .sides
                .iter()
                .zip(&coarse.sides)
                .all(|(a, b)| (a - b).abs() <= 1e-14 * a.abs().max(1.0));
        (same_domain && self.n % coarse.n == 0).then(|| self.n / coarse.n)
    }

    /// Element containing `x` and its reference coordinates there.
    pub(crate) fn locate(&self, x: &[f64]) -> (usize, [f64; 2]) {
        let cell = |t: f64, s: f64| -> (usize, f64) {
            let scaled = (t / s * self.n as f64).clamp(0.0, self.n as f64);
            let i = (scaled.floor() as usize).min(self.n - 1);
            (i, scaled - i as f64)
        };
        if self.d == 1 {
            let (i, a) = cell(x[0], self.sides[0]);
            (i, [a, 0.0])
        } else {
            let (i, a) = cell(x[0], self.sides[0]);
            let (j, b) = cell(x[1], self.sides[1]);
            let base = 2 * (i + self.n * j);
            // (v00, v10, v11): x = v00 + ξ(v10 − v00) + η(v11 − v00)
            // (v00, v11, v01): x = v00 + ξ(v11 − v00) + η(v01 − v00)
            if b <= a {
                (base, [a - b, b])
            } else {
                (base + 1, [a, b - a])
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn counts() {
        let m = build_mesh(2, &[1.0, 1.0], 2).unwrap();
        assert_eq!((m.vertex_count(), m.element_count()), (9, 8));
        let m = build_mesh(1, &[PI], 4).unwrap();
        assert_eq!((m.vertex_count(), m.element_count()), (5, 4));
        assert!((m.h - PI / 4.0).abs() < 1e-15);
        assert!(matches!(build_mesh(1, &[1.0], 0), Err(Error::Argument(_))));
    }

    #[test]
    fn refinement_is_nested() {
        let coarse = build_mesh(2, &[1.0, 2.0], 2).unwrap();
        let fine = coarse.refine(2).unwrap();
        assert_eq!(fine, build_mesh(2, &[1.0, 2.0], 4).unwrap());
        assert_eq!(fine.refinement_factor(&coarse), Some(2));
        assert_eq!(
            build_mesh(2, &[1.0, 2.0], 3)
                .unwrap()
                .refinement_factor(&coarse),
            None
        );
        // Every fine vertex lies on a coarse element edge or vertex set; in
        // particular coarse vertices are fine vertices.
        for v in 0..coarse.vertex_count() {
            let p = coarse.vertex(v);
            assert!((0..fine.vertex_count()).any(|w| fine.vertex(w) == p));
        }
    }

    #[test]
    fn positive_orientation_and_area() {
        let m = build_mesh(2, &[PI, 1.0], 5).unwrap();
        let mut area = 0.0;
        for e in 0..m.element_count() {
            let v = m.element(e);
            let (a, b, c) = (m.vertex(v[0]), m.vertex(v[1]), m.vertex(v[2]));
            let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
            assert!(det > 0.0);
            area += det / 2.0;
        }
        assert!((area - PI).abs() < 1e-13);
    }

    #[test]
    fn locate_maps_back() {
        let m = build_mesh(2, &[2.0, 1.0], 3).unwrap();
        for x in [[0.1, 0.9], [1.99, 0.01], [0.7, 0.3], [2.0, 1.0], [0.0, 0.0]] {
            let (e, r) = m.locate(&x);
            let v = m.element(e);
            let (a, b, c) = (m.vertex(v[0]), m.vertex(v[1]), m.vertex(v[2]));
            for k in 0..2 {
                let y = a[k] + r[0] * (b[k] - a[k]) + r[1] * (c[k] - a[k]);
                assert!((y - x[k]).abs() < 1e-14);
            }
            assert!(r[0] >= -1e-14 && r[1] >= -1e-14 && r[0] + r[1] <= 1.0 + 1e-14);
        }
    }
}
