//! Compressed sparse row storage for the finite-element matrices.

use std::fmt::Write as _;

use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::{SparseColMat, SymbolicSparseColMat};
use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            debug_assert!(r < nrows && c < ncols);
            if last == Some((r, c)) {
                *values.last_mut().expect("non-empty") += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Wraps raw CSR arrays whose column indices are sorted within each row.
    pub(crate) fn from_parts(
        nrows: usize,
        ncols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(row_ptr.len(), nrows + 1);
        debug_assert_eq!(col_idx.len(), values.len());
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.nrows)
            .map(|i| x[i] * self.row(i).map(|(j, v)| v * y[j]).sum::<f64>())
            .sum()
    }

    /// `self + alpha · other`.
    pub fn add_scaled(&self, alpha: f64, other: &CsrMatrix) -> Result<CsrMatrix> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::Argument("matrix dimensions differ".into()));
        }
        if self.row_ptr == other.row_ptr && self.col_idx == other.col_idx {
            let values = self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + alpha * b)
                .collect();
            return Ok(Self {
                values,
                ..self.clone()
            });
        }
        let trips = self
            .triplets()
            .chain(other.triplets().map(|(i, j, v)| (i, j, alpha * v)))
            .collect();
        Ok(Self::from_triplets(self.nrows, self.ncols, trips))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows).map(|i| self.get(i, i)).collect()
    }

    /// Largest `|A_ij − A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        self.triplets()
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }

    /// Gershgorin lower bound `min_i (A_ii − Σ_{j≠i} |A_ij|)` on the spectrum.
    pub fn gershgorin_lower(&self) -> f64 {
        (0..self.nrows)
            .map(|i| {
                let off: f64 = self
                    .row(i)
                    .filter(|&(j, _)| j != i)
                    .map(|(_, v)| v.abs())
                    .sum();
                self.get(i, i) - off
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }

    /// Column-compressed view of `Aᵀ`, which is `A` for symmetric input.
    fn transpose_to_faer(&self) -> SparseColMat<usize, f64> {
        let sym = SymbolicSparseColMat::new_checked(
            self.ncols,
            self.nrows,
            self.row_ptr.clone(),
            None,
            self.col_idx.clone(),
        );
        SparseColMat::new(sym, self.values.clone())
    }

    /// Coordinate text format, one `row col value` line per stored entry
    /// (zero-based indices), preceded by a `nrows ncols nnz` header.
    pub fn to_coordinate_text(&self) -> String {
        let mut out = String::with_capacity(32 * self.nnz());
        let _ = writeln!(out, "{} {} {}", self.nrows, self.ncols, self.nnz());
        for (i, j, v) in self.triplets() {
            let _ = writeln!(out, "{i} {j} {v:.17e}");
        }
        out
    }
}

/// Sparse Cholesky factorization `A = L Lᵀ` of a symmetric positive definite
/// matrix, with a fill-reducing ordering. Only the upper triangle of the
/// CSR input is read.
pub struct SparseCholesky {
    llt: Llt<usize, f64>,
    n: usize,
}

/// Fill-reducing ordering and elimination structure of a sparsity pattern,
/// reusable across matrices that share it.
#[derive(Debug, Clone)]
pub struct CholeskyAnalysis {
    symbolic: SymbolicLlt<usize>,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl CholeskyAnalysis {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        if a.nrows != a.ncols {
            return Err(Error::Matrix(
                "Cholesky factorization needs a square matrix".into(),
            ));
        }
        let m = a.transpose_to_faer();
        let symbolic = SymbolicLlt::try_new(m.symbolic(), faer::Side::Lower)
            .map_err(|e| Error::Matrix(format!("symbolic factorization failed: {e:?}")))?;
        Ok(Self {
            symbolic,
            row_ptr: a.row_ptr.clone(),
            col_idx: a.col_idx.clone(),
        })
    }

    pub fn matches(&self, a: &CsrMatrix) -> bool {
        self.row_ptr == a.row_ptr && self.col_idx == a.col_idx
    }
}

impl SparseCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        Self::factor_with(&CholeskyAnalysis::new(a)?, a)
    }

    /// Numeric factorization reusing `analysis`, which must come from a
    /// matrix with the same pattern.
    pub fn factor_with(analysis: &CholeskyAnalysis, a: &CsrMatrix) -> Result<Self> {
        if !analysis.matches(a) {
            return Err(Error::Matrix(
                "sparsity pattern differs from the analysed one".into(),
            ));
        }
        let m = a.transpose_to_faer();
        let llt =
            Llt::try_new_with_symbolic(analysis.symbolic.clone(), m.as_ref(), faer::Side::Lower)
                .map_err(|e| Error::Matrix(format!("Cholesky factorization failed: {e:?}")))?;
        Ok(Self { llt, n: a.nrows() })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        use faer::linalg::solvers::Solve;
        let mut rhs = faer::Mat::<f64>::from_fn(self.n, 1, |i, _| b[i]);
        self.llt.solve_in_place(rhs.as_mut());
        (0..self.n).map(|i| rhs[(i, 0)]).collect()
    }
}
