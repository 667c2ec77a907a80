//! Dense complex matrices.
//!
//! `ComplexMatrix` is a thin wrapper around `nalgebra::DMatrix<Complex64>`
//! that fixes the handful of operations the rest of the crate relies on:
//! conjugate transpose, checked products, Frobenius norm and a thin SVD with
//! singular values in descending order.

use std::fmt;
use std::ops::Index;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

/// Thin singular value decomposition `A = U diag(S) V^H`.
///
/// `u` is `rows × k`, `v` is `cols × k` with `k = min(rows, cols)`. The
/// per-column phase of the singular vectors is whatever the backend
/// produced; only subspaces and magnitudes are meaningful.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    /// Builds a matrix from entries listed row by row.
    ///
    /// Panics if `entries.len() != rows * cols`.
    pub fn from_row_slice(rows: usize, cols: usize, entries: &[C64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count must equal rows * cols");
        Self(DMatrix::from_row_slice(rows, cols, entries))
    }

    /// Real-valued convenience constructor, row by row.
    pub fn from_real_rows(rows: usize, cols: usize, entries: &[f64]) -> Self {
        let cplx: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_row_slice(rows, cols, &cplx)
    }

    /// `N × 1` column vector.
    pub fn column_vector(entries: &[C64]) -> Self {
        Self(DMatrix::from_column_slice(entries.len(), 1, entries))
    }

    /// Stacks `N × 1` vectors side by side.
    pub fn from_columns(columns: &[ComplexMatrix]) -> Result<Self> {
        let Some(first) = columns.first() else {
            return Err(Error::InvalidParameter("no columns given".into()));
        };
        let n = first.rows();
        for c in columns {
            if c.cols() != 1 || c.rows() != n {
                return Err(Error::DimensionMismatch {
                    op: "from_columns",
                    left: (n, 1),
                    right: c.shape(),
                });
            }
        }
        Ok(Self::from_fn(n, columns.len(), |i, j| columns[j].0[(i, 0)]))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.0[(row, col)] = value;
    }

    /// Column `j` as an `N × 1` matrix.
    pub fn column(&self, j: usize) -> ComplexMatrix {
        Self(self.0.columns(j, 1).into_owned())
    }

    /// The first `k` columns.
    pub fn leading_columns(&self, k: usize) -> ComplexMatrix {
        Self(self.0.columns(0, k).into_owned())
    }

    /// Columns picked by index, in the given order.
    pub fn select_columns(&self, indices: &[usize]) -> ComplexMatrix {
        Self(self.0.select_columns(indices))
    }

    /// Entries in row-major order.
    pub fn to_row_major(&self) -> Vec<C64> {
        self.0.transpose().iter().copied().collect()
    }

    pub fn as_inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn hermitian(&self) -> ComplexMatrix {
        Self(self.0.adjoint())
    }

    pub fn matmul(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols() != rhs.rows() {
            return Err(Error::DimensionMismatch {
                op: "matmul",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        Ok(Self(&self.0 * &rhs.0))
    }

    /// `self^H * rhs` without materializing the adjoint.
    pub fn hermitian_matmul(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.rows() != rhs.rows() {
            return Err(Error::DimensionMismatch {
                op: "hermitian_matmul",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        Ok(Self(self.0.ad_mul(&rhs.0)))
    }

    pub fn add(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_same_shape("add", rhs)?;
        Ok(Self(&self.0 + &rhs.0))
    }

    pub fn sub(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_same_shape("sub", rhs)?;
        Ok(Self(&self.0 - &rhs.0))
    }

    pub fn scale(&self, factor: C64) -> ComplexMatrix {
        Self(&self.0 * factor)
    }

    pub fn scale_real(&self, factor: f64) -> ComplexMatrix {
        self.scale(C64::new(factor, 0.0))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> Result<f64> {
        self.check_same_shape("max_abs_diff", other)?;
        Ok(self
            .0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// Thin SVD with singular values sorted in descending order.
    pub fn svd(&self) -> Result<Svd> {
        if !self.is_finite() {
            return Err(Error::NonFinite);
        }
        let dec = self.0.clone().svd(true, true);
        let u = dec.u.expect("left singular vectors requested");
        let v = dec.v_t.expect("right singular vectors requested").adjoint();
        let s = dec.singular_values;

        let mut order: Vec<usize> = (0..s.len()).collect();
        order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
        Ok(Svd {
            u: Self(u.select_columns(&order)),
            singular_values: order.iter().map(|&i| s[i]).collect(),
            v: Self(v.select_columns(&order)),
        })
    }

    fn check_same_shape(&self, op: &'static str, rhs: &ComplexMatrix) -> Result<()> {
        if self.shape() != rhs.shape() {
            return Err(Error::DimensionMismatch {
                op,
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        Ok(())
    }
}

impl From<DMatrix<C64>> for ComplexMatrix {
    fn from(m: DMatrix<C64>) -> Self {
        Self(m)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.0[idx]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix {}x{} ", self.rows(), self.cols())?;
        f.debug_list().entries(self.to_row_major()).finish()
    }
}

impl Svd {
    /// `U diag(S) V^H`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let k = self.singular_values.len();
        let mut us = self.u.0.clone();
        for j in 0..k {
            let s = self.singular_values[j];
            us.column_mut(j).scale_mut(s);
        }
        ComplexMatrix(us * self.v.0.adjoint())
    }
}
