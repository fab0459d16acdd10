//! Lowest eigenpair of `H x = λ M x` with `H` symmetric (Hermitian) and `M`
//! symmetric positive definite.
//!
//! Small problems go through a dense symmetric eigendecomposition; large
//! sparse ones through shifted inverse iteration on a sparse Cholesky
//! factorization of `H − σM`.

use std::borrow::Cow;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sparse::{CholeskyAnalysis, CsrMatrix, SparseCholesky};

/// Largest dimension handled by the dense path in [`Method::Auto`].
pub const DENSE_LIMIT: usize = 512;

#[derive(Debug, Clone, PartialEq)]
pub struct EigResult<T> {
    pub lambda: f64,
    /// Normalized so that `xᵀ M x = 1`; the entry of largest magnitude is
    /// real and positive.
    pub vector: Vec<T>,
    /// `‖H x − λ M x‖₂ / ‖x‖_M`.
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub enum SymOp<'a> {
    Dense(&'a DMatrix<f64>),
    Sparse(&'a CsrMatrix),
}

impl<'a> SymOp<'a> {
    pub fn dim(&self) -> usize {
        match self {
            SymOp::Dense(m) => m.nrows(),
            SymOp::Sparse(m) => m.nrows(),
        }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            SymOp::Dense(m) => (*m * DVector::from_column_slice(x)).as_slice().to_vec(),
            SymOp::Sparse(m) => m.matvec(x),
        }
    }

    fn to_dense(self) -> DMatrix<f64> {
        match self {
            SymOp::Dense(m) => m.clone(),
            SymOp::Sparse(m) => m.to_dense(),
        }
    }

    fn to_sparse(self) -> Cow<'a, CsrMatrix> {
        match self {
            SymOp::Sparse(m) => Cow::Borrowed(m),
            SymOp::Dense(m) => {
                let trips = (0..m.nrows())
                    .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
                    .filter_map(|(i, j)| (m[(i, j)] != 0.0).then(|| (i, j, m[(i, j)])))
                    .collect();
                Cow::Owned(CsrMatrix::from_triplets(m.nrows(), m.ncols(), trips))
            }
        }
    }

    fn gershgorin(&self) -> (f64, f64) {
        let rows: Vec<(f64, f64)> = match self {
            SymOp::Dense(m) => (0..m.nrows())
                .map(|i| {
                    let off: f64 = (0..m.ncols())
                        .filter(|&j| j != i)
                        .map(|j| m[(i, j)].abs())
                        .sum();
                    (m[(i, i)], off)
                })
                .collect(),
            SymOp::Sparse(m) => (0..m.nrows())
                .map(|i| {
                    let off: f64 = m
                        .row(i)
                        .filter(|&(j, _)| j != i)
                        .map(|(_, v)| v.abs())
                        .sum();
                    (m.get(i, i), off)
                })
                .collect(),
        };
        let lo = rows
            .iter()
            .map(|(d, o)| d - o)
            .fold(f64::INFINITY, f64::min);
        let hi = rows
            .iter()
            .map(|(d, o)| d + o)
            .fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Auto,
    Dense,
    InverseIteration,
}

#[derive(Debug, Clone)]
pub struct EigOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Shift for inverse iteration; a Gershgorin lower bound when absent.
    pub shift: Option<f64>,
    pub x0: Option<Vec<f64>>,
    pub method: Method,
    /// Symbolic factorization of the pattern of `H − σM`, reused when the
    /// pattern matches.
    pub analysis: Option<Arc<CholeskyAnalysis>>,
}

impl Default for EigOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 1000,
            shift: None,
            x0: None,
            method: Method::Auto,
            analysis: None,
        }
    }
}

impl EigOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

/// Lowest eigenpair of the real symmetric pencil `(H, M)`; `M = I` when
/// `m` is `None`.
pub fn lowest_eigenpair(
    h: SymOp<'_>,
    m: Option<SymOp<'_>>,
    opts: &EigOptions,
) -> Result<EigResult<f64>> {
    let n = h.dim();
    if let Some(m) = &m {
        if m.dim() != n {
            return Err(Error::Argument(format!(
                "H is {n}x{n} but M is {0}x{0}",
                m.dim()
            )));
        }
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Argument(
            "eigensolver tolerance must be positive".into(),
        ));
    }
    if n == 0 {
        return Err(Error::Argument("empty operator".into()));
    }
    let dense = match opts.method {
        Method::Auto => n <= DENSE_LIMIT,
        Method::Dense => true,
        Method::InverseIteration => false,
    };
    let mut result = if dense {
        dense_lowest(h, m)?
    } else {
        inverse_iteration(h, m, opts)?
    };
    canonicalize_real(&mut result.vector);
    Ok(result)
}

fn m_apply(m: &Option<SymOp<'_>>, x: &[f64]) -> Vec<f64> {
    match m {
        Some(m) => m.apply(x),
        None => x.to_vec(),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn residual(h: &SymOp<'_>, m: &Option<SymOp<'_>>, x: &[f64], lambda: f64) -> f64 {
    let hx = h.apply(x);
    let mx = m_apply(m, x);
    let r: f64 = hx
        .iter()
        .zip(&mx)
        .map(|(a, b)| (a - lambda * b).powi(2))
        .sum();
    r.sqrt() / dot(x, &mx).sqrt()
}

fn dense_lowest(h: SymOp<'_>, m: Option<SymOp<'_>>) -> Result<EigResult<f64>> {
    let hd = h.to_dense();
    let (lambda, x) = match &m {
        None => {
            let eig = hd.symmetric_eigen();
            let i = eig.eigenvalues.imin();
            (eig.eigenvalues[i], eig.eigenvectors.column(i).into_owned())
        }
        Some(m) => {
            let chol = m
                .to_dense()
                .cholesky()
                .ok_or_else(|| Error::Matrix("mass matrix is not positive definite".into()))?;
            let l = chol.l();
            // C = L⁻¹ H L⁻ᵀ
            let linv_h = l.solve_lower_triangular(&hd).expect("nonsingular factor");
            let c = l
                .solve_lower_triangular(&linv_h.transpose())
                .expect("nonsingular factor");
            let c = (&c + c.transpose()) * 0.5;
            let eig = c.symmetric_eigen();
            let i = eig.eigenvalues.imin();
            let y = eig.eigenvectors.column(i).into_owned();
            let x = l
                .transpose()
                .solve_upper_triangular(&y)
                .expect("nonsingular factor");
            (eig.eigenvalues[i], x)
        }
    };
    let mut x = x.as_slice().to_vec();
    let norm = dot(&x, &m_apply(&m, &x)).sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
    let res = residual(&h, &m, &x, lambda);
    Ok(EigResult {
        lambda,
        vector: x,
        residual: res,
        iterations: 1,
    })
}

fn initial_shift(h: &SymOp<'_>, m: &Option<SymOp<'_>>) -> f64 {
    let (hlo, _) = h.gershgorin();
    let (mlo, mhi) = m.as_ref().map_or((1.0, 1.0), |m| m.gershgorin());
    if hlo >= 0.0 {
        hlo / mhi
    } else if mlo > 0.0 {
        hlo / mlo
    } else {
        hlo
    }
}

fn factor_shifted(
    h: &CsrMatrix,
    m: &CsrMatrix,
    mut sigma: f64,
    analysis: &CholeskyAnalysis,
) -> Result<(SparseCholesky, f64)> {
    for _ in 0..40 {
        let a = h.add_scaled(-sigma, m)?;
        match SparseCholesky::factor_with(analysis, &a) {
            Ok(f) => return Ok((f, sigma)),
            Err(_) => sigma -= sigma.abs().max(1.0),
        }
    }
    Err(Error::Matrix(
        "no shift makes H − σM positive definite; M is probably indefinite".into(),
    ))
}

fn inverse_iteration(
    h: SymOp<'_>,
    m: Option<SymOp<'_>>,
    opts: &EigOptions,
) -> Result<EigResult<f64>> {
    let n = h.dim();
    let hs = h.to_sparse();
    let ms = m.map_or_else(|| Cow::Owned(CsrMatrix::identity(n)), |m| m.to_sparse());
    if ms.diagonal().iter().any(|d| !(*d > 0.0)) {
        return Err(Error::Matrix(
            "mass matrix has a non-positive diagonal entry".into(),
        ));
    }
    let m_op = Some(SymOp::Sparse(&ms));
    let h_op = SymOp::Sparse(&hs);

    let sigma0 = opts.shift.unwrap_or_else(|| initial_shift(&h, &m));
    let probe = hs.add_scaled(-sigma0, &ms)?;
    let analysis = match &opts.analysis {
        Some(a) if a.matches(&probe) => Arc::clone(a),
        _ => Arc::new(CholeskyAnalysis::new(&probe)?),
    };
    drop(probe);
    let (mut factor, mut sigma) = factor_shifted(&hs, &ms, sigma0, &analysis)?;

    let mut x = match &opts.x0 {
        Some(x0) if x0.len() == n && x0.iter().any(|v| *v != 0.0) => x0.clone(),
        _ => vec![1.0; n],
    };
    let norm = dot(&x, &ms.matvec(&x)).sqrt();
    x.iter_mut().for_each(|v| *v /= norm);

    let mut best = (f64::INFINITY, x.clone());
    let mut reshifts = 0;
    let mut last_lambda = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let mut y = factor.solve(&ms.matvec(&x));
        let norm = dot(&y, &ms.matvec(&y)).sqrt();
        y.iter_mut().for_each(|v| *v /= norm);
        x = y;
        let lambda = dot(&x, &hs.matvec(&x));
        let res = residual(&h_op, &m_op, &x, lambda);
        if res < best.0 {
            best = (res, x.clone());
        }
        if res <= opts.tol {
            return Ok(EigResult {
                lambda,
                vector: x,
                residual: res,
                iterations: it,
            });
        }
        // A shift far below the eigenvalue makes the contraction slow; once
        // the Rayleigh quotient has settled, move the shift to λ − 1.
        let settled = (lambda - last_lambda).abs() <= 1e-6 * lambda.abs().max(1.0);
        if settled && lambda - sigma > 2.0 && reshifts < 3 {
            if let Ok((f, s)) = factor_shifted(&hs, &ms, lambda - 1.0, &analysis) {
                factor = f;
                sigma = s;
            }
            reshifts += 1;
        }
        last_lambda = lambda;
    }
    Err(Error::Convergence {
        iterations: opts.max_iter,
        residual: best.0,
        best: Some(best.1),
    })
}

/// Flips the sign so that the entry of largest magnitude is positive.
pub fn canonicalize_real(x: &mut [f64]) {
    let (mut imax, mut vmax) = (0, 0.0);
    for (i, v) in x.iter().enumerate() {
        if v.abs() > vmax {
            (imax, vmax) = (i, v.abs());
        }
    }
    if !x.is_empty() && x[imax] < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
}

/// Rotates the phase so that the entry of largest modulus is real positive.
pub fn canonicalize_complex(x: &mut [Complex64]) {
    let Some(pivot) = x
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
    else {
        return;
    };
    if pivot.norm() == 0.0 {
        return;
    }
    let phase = pivot.conj() / pivot.norm();
    x.iter_mut().for_each(|v| *v *= phase);
}

/// Lowest eigenpair of a dense Hermitian matrix (identity mass).
pub fn lowest_eigenpair_hermitian(h: &DMatrix<Complex64>) -> Result<EigResult<Complex64>> {
    if h.nrows() != h.ncols() || h.nrows() == 0 {
        return Err(Error::Argument(
            "Hermitian eigensolver needs a non-empty square matrix".into(),
        ));
    }
    let eig = h.clone().symmetric_eigen();
    let i = eig.eigenvalues.imin();
    let lambda = eig.eigenvalues[i];
    let mut x: Vec<Complex64> = eig.eigenvectors.column(i).iter().copied().collect();
    let norm = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    x.iter_mut().for_each(|c| *c /= norm);
    canonicalize_complex(&mut x);
    let xv = DVector::from_column_slice(&x);
    let r = h * &xv - &xv * Complex64::new(lambda, 0.0);
    Ok(EigResult {
        lambda,
        vector: x,
        residual: r.norm(),
        iterations: 1,
    })
}
