//! Gauss–Legendre rules and collapsed (Duffy) rules on the reference simplex.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Highest polynomial degree for which a simplex rule is generated.
pub const MAX_DEGREE: usize = 40;

/// Points in reference coordinates (`ξ` in 1D, `(ξ, η)` in 2D, stored with
/// stride `d`) and weights summing to the reference measure.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub d: usize,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, q: usize) -> &[f64] {
        &self.points[q * self.d..(q + 1) * self.d]
    }
}

/// `n`-point Gauss–Legendre rule on `[0, 1]` (Golub–Welsch).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i.abs_diff(j) == 1 {
            let k = i.max(j) as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = jacobi.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (0.5 * (eig.eigenvalues[i] + 1.0), v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Rule on the reference simplex (`[0, 1]` or the unit right triangle)
/// exact for polynomials of total degree `degree`.
pub fn simplex_rule(d: usize, degree: usize) -> Result<QuadratureRule> {
    if degree > MAX_DEGREE {
        return Err(Error::Config(format!(
            "no quadrature rule of degree {degree} (maximum {MAX_DEGREE})"
        )));
    }
    match d {
        1 => {
            let (x, w) = gauss_legendre(degree / 2 + 1);
            Ok(QuadratureRule {
                d,
                points: x,
                weights: w,
            })
        }
        2 => {
            // (u, v) ↦ (u, v(1 − u)) carries [0,1]² onto the triangle with
            // Jacobian 1 − u, adding one degree in u.
            let (x, w) = gauss_legendre((degree + 2).div_ceil(2));
            let mut points = Vec::with_capacity(2 * x.len() * x.len());
            let mut weights = Vec::with_capacity(x.len() * x.len());
            for (u, wu) in x.iter().zip(&w) {
                for (v, wv) in x.iter().zip(&w) {
                    points.extend([*u, v * (1.0 - u)]);
                    weights.push(wu * wv * (1.0 - u));
                }
            }
            Ok(QuadratureRule { d, points, weights })
        }
        _ => Err(Error::Config(format!("no simplex rule in dimension {d}"))),
    }
}
