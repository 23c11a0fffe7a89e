use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Mul};

use crate::error::{mismatch, Error, Result};

/// Dense complex matrix with finite entries and at least one row and column.
///
/// Serialises as nested rows of `[re, im]` pairs.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<Complex64>>", into = "Vec<Vec<Complex64>>")]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl TryFrom<Vec<Vec<Complex64>>> for ComplexMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<ComplexMatrix> for Vec<Vec<Complex64>> {
    fn from(m: ComplexMatrix) -> Self {
        m.to_rows()
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(format!(
                "matrix must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(mismatch(rows * cols, entries.len()));
        }
        Self::from_dmatrix(DMatrix::from_row_slice(rows, cols, &entries))
    }

    pub fn from_dmatrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::InvalidArgument("empty matrix".into()));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(Self(m))
    }

    /// Builds a matrix from nested rows; all rows must share a length.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(mismatch(c, bad.len()));
        }
        Self::new(r, c, rows.concat())
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        assert!(rows > 0 && cols > 0, "matrix must be at least 1x1");
        Self(DMatrix::from_fn(rows, cols, f))
    }

    pub fn identity(n: usize) -> Self {
        assert!(n > 0, "identity needs n >= 1");
        Self(DMatrix::identity(n, n))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix must be at least 1x1");
        Self(DMatrix::zeros(rows, cols))
    }

    /// Diagonal matrix `Diag(exp(i*phase))`.
    pub fn from_phases(phases: &[f64]) -> Self {
        let n = phases.len();
        let mut m = DMatrix::zeros(n, n);
        for (k, &p) in phases.iter().enumerate() {
            m[(k, k)] = Complex64::from_polar(1.0, p);
        }
        Self(m)
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

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.0[(r, c)]
    }

    pub fn set(&mut self, r: usize, c: usize, z: Complex64) {
        self.0[(r, c)] = z;
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// Sum of squared magnitudes, i.e. `Tr(A^dagger A)`.
    pub fn frobenius_sq(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(&self.0 * s)
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols() != rhs.rows() {
            return Err(mismatch(
                format!("{} rows", self.cols()),
                format!("{} rows", rhs.rows()),
            ));
        }
        Ok(Self(&self.0 * &rhs.0))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape(), "shape mismatch");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |(A^dagger A - I)_ij|`.
    pub fn unitarity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let g = Self(self.0.adjoint() * &self.0);
        g.max_abs_diff(&Self::identity(self.rows()))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_error() < tol
    }

    /// Entrywise moduli as a real-valued complex matrix.
    pub fn magnitudes(&self) -> Self {
        Self(self.0.map(|z| Complex64::new(z.norm(), 0.0)))
    }

    /// Submatrix on the given rows and columns, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Result<Self> {
        for &r in rows {
            if r >= self.rows() {
                return Err(Error::IndexOutOfRange { index: r, dim: self.rows() });
            }
        }
        for &c in cols {
            if c >= self.cols() {
                return Err(Error::IndexOutOfRange { index: c, dim: self.cols() });
            }
        }
        if rows.is_empty() || cols.is_empty() {
            return Err(Error::InvalidArgument("empty selection".into()));
        }
        Ok(Self::from_fn(rows.len(), cols.len(), |i, j| self.0[(rows[i], cols[j])]))
    }

    /// Block-diagonal sum `self (+) other`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (r1, c1) = self.shape();
        let (r2, c2) = other.shape();
        let mut m = DMatrix::zeros(r1 + r2, c1 + c2);
        m.view_mut((0, 0), (r1, c1)).copy_from(&self.0);
        m.view_mut((r1, c1), (r2, c2)).copy_from(&other.0);
        Self(m)
    }

    /// Row-major nested rows.
    pub fn to_rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.rows())
            .map(|r| (0..self.cols()).map(|c| self.0[(r, c)]).collect())
            .collect()
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for r in 0..self.rows() {
            write!(f, "  ")?;
            for c in 0..self.cols() {
                let z = self.0[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: Self) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: Self) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "matrix sum shape mismatch");
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

/// Unitary DFT matrix `F[j,k] = exp(-2 pi i j k / K) / sqrt(K)`.
pub fn dft_matrix(k: usize) -> ComplexMatrix {
    assert!(k >= 1, "DFT dimension must be positive");
    let norm = 1.0 / (k as f64).sqrt();
    ComplexMatrix::from_fn(k, k, |j, l| {
        let arg = -2.0 * PI * ((j * l) % k) as f64 / k as f64;
        Complex64::from_polar(norm, arg)
    })
}
