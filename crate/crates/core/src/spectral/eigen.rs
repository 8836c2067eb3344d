//! Hermitian eigensolvers.
//!
//! Dense problems go through nalgebra's Householder/QR solver. Large
//! matrices with a narrow band (after an optional symmetric permutation) are
//! handed to LAPACK `zhbev`, which is O(n^2 b) instead of O(n^3).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::matrix::{hermiticity_defect, CMatrix, HermitianMatrix, HERMITIAN_TOL};

// Below this size the dense solver is always fast enough.
const BANDED_MIN_DIM: usize = 128;

/// Eigenvalues and orthonormal eigenvectors (columns), ascending.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigh {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V f(Lambda) V^H` for a complex spectral function.
    pub fn apply_function(&self, f: impl Fn(f64) -> Complex64) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let s = f(lam);
            for z in scaled.column_mut(j).iter_mut() {
                *z *= s;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

/// All eigenvalues of a Hermitian matrix, ascending.
pub fn eigenvalues_hermitian(m: &HermitianMatrix) -> Result<Vec<f64>> {
    let n = m.dim();
    if n >= BANDED_MIN_DIM {
        let kd = bandwidth(m.as_matrix());
        if banded_pays_off(n, kd) {
            return banded_eigenvalues(m.as_matrix(), kd);
        }
    }
    Ok(dense_eigenvalues(m.as_matrix()))
}

/// Eigenvalues of an arbitrary square matrix after checking it is Hermitian.
pub fn eigenvalues_checked(m: &CMatrix) -> Result<Vec<f64>> {
    let deviation = hermiticity_defect(m);
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
    }
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation, tolerance: HERMITIAN_TOL });
    }
    eigenvalues_hermitian(&HermitianMatrix::from_trusted(m.clone()))
}

/// Eigenvalues of `P M P^T` where `order[i]` is the original index placed at
/// row `i`. The spectrum is that of `M`; the ordering only affects the band
/// structure seen by the solver.
pub fn eigenvalues_hermitian_permuted(m: &HermitianMatrix, order: &[usize]) -> Result<Vec<f64>> {
    let n = m.dim();
    if order.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: order.len() });
    }
    let src = m.as_matrix();
    let permuted = CMatrix::from_fn(n, n, |i, j| src[(order[i], order[j])]);
    eigenvalues_hermitian(&HermitianMatrix::from_trusted(permuted))
}

/// Full eigendecomposition, ascending eigenvalues.
pub fn eigh(m: &HermitianMatrix) -> Eigh {
    let decomposition = m.as_matrix().clone().symmetric_eigen();
    let n = m.dim();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| decomposition.eigenvalues[a].total_cmp(&decomposition.eigenvalues[b]));
    let values = idx.iter().map(|&i| decomposition.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| decomposition.eigenvectors[(r, idx[c])]);
    Eigh { values, vectors }
}

/// `max_j ||M v_j - lambda_j v_j||`.
pub fn max_residual(m: &HermitianMatrix, eig: &Eigh) -> f64 {
    let mv = m.as_matrix() * &eig.vectors;
    (0..eig.dim())
        .map(|j| (mv.column(j) - eig.vectors.column(j) * Complex64::from(eig.values[j])).norm())
        .fold(0.0, f64::max)
}

fn dense_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Largest `|i - j|` with a nonzero entry.
pub fn bandwidth(m: &CMatrix) -> usize {
    let n = m.nrows();
    let mut kd = 0;
    for j in 0..n {
        for i in (j + kd + 1)..n {
            if m[(i, j)] != Complex64::ZERO {
                kd = i - j;
            }
        }
    }
    kd
}

fn banded_pays_off(n: usize, kd: usize) -> bool {
    6 * kd < n
}

/// LAPACK `zhbev` on the lower band of `m` (eigenvalues only).
fn banded_eigenvalues(m: &CMatrix, kd: usize) -> Result<Vec<f64>> {
    let n = m.nrows();
    let ldab = kd + 1;
    // Lower band storage: ab[(i - j) + j * ldab] = M[i][j] for j <= i <= j + kd.
    let mut ab = vec![Complex64::ZERO; ldab * n];
    for j in 0..n {
        for i in j..(j + kd + 1).min(n) {
            ab[(i - j) + j * ldab] = m[(i, j)];
        }
    }
    let mut w = vec![0.0f64; n];
    let mut work = vec![Complex64::ZERO; n.max(1)];
    let mut rwork = vec![0.0f64; (3 * n).saturating_sub(2).max(1)];
    let mut z = [Complex64::ZERO; 1];
    let mut info = 0i32;
    let (n_i, kd_i, ldab_i, ldz) = (n as i32, kd as i32, ldab as i32, 1i32);
    // SAFETY: buffers are sized per the zhbev contract (ab: ldab*n, w: n,
    // work: n, rwork: max(1, 3n-2)); jobz = 'N' never touches z beyond ldz = 1.
    unsafe {
        lapack_sys::zhbev_(
            b"N".as_ptr() as *const _,
            b"L".as_ptr() as *const _,
            &n_i,
            &kd_i,
            ab.as_mut_ptr() as *mut _,
            &ldab_i,
            w.as_mut_ptr(),
            z.as_mut_ptr() as *mut _,
            &ldz,
            work.as_mut_ptr() as *mut _,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "zhbev", info });
    }
    w.sort_by(f64::total_cmp);
    Ok(w)
}
