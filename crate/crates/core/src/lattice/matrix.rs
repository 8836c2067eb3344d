use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Absolute tolerance for the Hermitian invariant.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Dense complex matrix with `M[i][j] = conj(M[j][i])` to within [`HERMITIAN_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    data: CMatrix,
}

impl HermitianMatrix {
    pub fn new(data: CMatrix) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::DimensionMismatch { expected: data.nrows(), found: data.ncols() });
        }
        let deviation = hermiticity_defect(&data);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation, tolerance: HERMITIAN_TOL });
        }
        Ok(HermitianMatrix { data })
    }

    /// Wraps a matrix that is Hermitian by construction.
    pub(crate) fn from_trusted(data: CMatrix) -> Self {
        debug_assert!(hermiticity_defect(&data) <= HERMITIAN_TOL);
        HermitianMatrix { data }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        HermitianMatrix {
            data: CMatrix::from_fn(n, n, |i, j| if i == j { diag[i].into() } else { Complex64::ZERO }),
        }
    }

    pub fn identity(dim: usize) -> Self {
        HermitianMatrix { data: CMatrix::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        HermitianMatrix { data: CMatrix::zeros(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_inner(self) -> CMatrix {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[(i, j)]
    }

    /// Upper bound on the spectral norm: largest absolute row sum.
    pub fn row_sum_norm(&self) -> f64 {
        self.data.row_iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> Self {
        HermitianMatrix { data: self.data.map(|z| z * s) }
    }

    /// `self + s * I`.
    pub fn shifted(&self, s: f64) -> Self {
        let mut data = self.data.clone();
        for i in 0..data.nrows() {
            data[(i, i)] += s;
        }
        HermitianMatrix { data }
    }

    pub fn try_add(&self, other: &HermitianMatrix) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(HermitianMatrix { data: &self.data + &other.data })
    }
}

/// `max_ij |M_ij - conj(M_ji)|`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows().min(m.ncols());
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Frobenius norm of the difference of two matrices.
pub fn frobenius_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm()
}
