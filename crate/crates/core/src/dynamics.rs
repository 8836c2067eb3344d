//! Time evolution, spectral projectors, the Sz.-Nagy intertwiner and the
//! propagation defect of an effective Hamiltonian.

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landau::{continuum_hamiltonian, lll_effective, FourierPotential, LandauBasisSpec, MIN_GAP_FRACTION};
use crate::lattice::matrix::{CMatrix, HermitianMatrix};
use crate::spectral::eigen::{eigh, Eigh};

pub type CVector = DVector<Complex64>;

const NORM_TOL: f64 = 1e-10;
const PROJECTOR_TOL: f64 = 1e-10;
/// Eigenvalues closer than this to a window edge make the window ambiguous.
pub const WINDOW_TOL: f64 = 1e-9;

/// Unit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct WavePacket {
    coeffs: CVector,
}

impl WavePacket {
    pub fn new(coeffs: CVector) -> Result<Self> {
        let norm = coeffs.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid(format!("wave packet norm is {norm}, expected 1")));
        }
        Ok(WavePacket { coeffs })
    }

    /// Normalizes a nonzero vector.
    pub fn normalized(coeffs: CVector) -> Result<Self> {
        let norm = coeffs.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::ZeroProjection);
        }
        Ok(WavePacket { coeffs: coeffs / Complex64::from(norm) })
    }

    pub fn basis_state(dim: usize, i: usize) -> Result<Self> {
        if i >= dim {
            return Err(Error::invalid(format!("basis index {i} out of range for dimension {dim}")));
        }
        let mut v = CVector::zeros(dim);
        v[i] = Complex64::ONE;
        Ok(WavePacket { coeffs: v })
    }

    pub fn coeffs(&self) -> &CVector {
        &self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }
}

/// Orthogonal projector.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    matrix: CMatrix,
    rank: usize,
}

impl Projector {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        let idempotent = (&matrix * &matrix - &matrix).norm();
        let hermitian = (&matrix - matrix.adjoint()).norm();
        if idempotent > PROJECTOR_TOL || hermitian > PROJECTOR_TOL {
            return Err(Error::invalid(format!(
                "not an orthogonal projector: |P^2 - P| = {idempotent:.2e}, |P - P^H| = {hermitian:.2e}"
            )));
        }
        let trace = matrix.trace().re;
        let rank = trace.round();
        if (trace - rank).abs() > 1e-8 {
            return Err(Error::invalid(format!("projector trace {trace} is not an integer")));
        }
        Ok(Projector { matrix, rank: rank as usize })
    }

    /// Projector onto the span of orthonormal columns.
    pub fn from_orthonormal_columns(v: &CMatrix) -> Result<Self> {
        Projector::new(v * v.adjoint())
    }

    pub fn zero(dim: usize) -> Self {
        Projector { matrix: CMatrix::zeros(dim, dim), rank: 0 }
    }

    pub fn identity(dim: usize) -> Self {
        Projector { matrix: CMatrix::identity(dim, dim), rank: dim }
    }

    /// Projector onto the coordinate vectors `indices`.
    pub fn coordinate(dim: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut m = CMatrix::zeros(dim, dim);
        for i in indices {
            if i >= dim {
                return Err(Error::invalid(format!("index {i} out of range for dimension {dim}")));
            }
            m[(i, i)] = Complex64::ONE;
        }
        Projector::new(m)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.matrix * v
    }
}

/// Unitary `W` with `W P W^H = Q`.
#[derive(Debug, Clone)]
pub struct IntertwinerUnitary {
    pub w: CMatrix,
    pub source: Projector,
    pub target: Projector,
}

impl IntertwinerUnitary {
    /// `(||W^H W - I||, ||W P W^H - Q||)`.
    pub fn defects(&self) -> (f64, f64) {
        let n = self.w.nrows();
        let unitary = (self.w.adjoint() * &self.w - CMatrix::identity(n, n)).norm();
        let intertwine = (&self.w * self.source.matrix() * self.w.adjoint() - self.target.matrix()).norm();
        (unitary, intertwine)
    }
}

/// Cached eigendecomposition for repeated `e^{-itH}`.
#[derive(Debug, Clone)]
pub struct Propagator {
    eig: Eigh,
}

impl Propagator {
    pub fn new(h: &HermitianMatrix) -> Self {
        Propagator { eig: eigh(h) }
    }

    pub fn eigen(&self) -> &Eigh {
        &self.eig
    }

    pub fn dim(&self) -> usize {
        self.eig.dim()
    }

    /// `e^{-itH} v`.
    pub fn apply(&self, v: &CVector, t: f64) -> Result<CVector> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: v.len() });
        }
        let mut c = self.eig.vectors.adjoint() * v;
        for (z, &lam) in c.iter_mut().zip(&self.eig.values) {
            *z *= Complex64::from_polar(1.0, -t * lam);
        }
        Ok(&self.eig.vectors * c)
    }

    pub fn evolve(&self, psi: &WavePacket, t: f64) -> Result<WavePacket> {
        Ok(WavePacket { coeffs: self.apply(&psi.coeffs, t)? })
    }

    /// Spectral projector for eigenvalues in `[lo, hi]`.
    pub fn projection(&self, lo: f64, hi: f64) -> Result<Projector> {
        let n = self.dim();
        let mut cols = Vec::new();
        for (j, &lam) in self.eig.values.iter().enumerate() {
            for edge in [lo, hi] {
                if edge.is_finite() && (lam - edge).abs() < WINDOW_TOL {
                    return Err(Error::AmbiguousWindow { value: lam, tolerance: WINDOW_TOL });
                }
            }
            if lam >= lo && lam <= hi {
                cols.push(j);
            }
        }
        if cols.is_empty() {
            return Ok(Projector::zero(n));
        }
        let v = self.eig.vectors.select_columns(&cols);
        let m = &v * v.adjoint();
        // Symmetrize away rounding before validation.
        let m = (&m + m.adjoint()) * Complex64::from(0.5);
        Projector::new(m)
    }
}

/// `e^{-itH} psi`.
pub fn evolve(h: &HermitianMatrix, psi: &WavePacket, t: f64) -> Result<WavePacket> {
    if h.dim() != psi.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: psi.dim() });
    }
    Propagator::new(h).evolve(psi, t)
}

/// Spectral projector of `h` onto eigenvalues in `window`.
pub fn spectral_projection(h: &HermitianMatrix, window: (f64, f64)) -> Result<Projector> {
    Propagator::new(h).projection(window.0, window.1)
}

/// `W = (I - (Q - P)^2)^{-1/2} (QP + (I - Q)(I - P))`, defined for `||P - Q|| < 1`.
pub fn nagy_intertwiner(p: &Projector, q: &Projector) -> Result<IntertwinerUnitary> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: q.dim() });
    }
    let n = p.dim();
    let id = CMatrix::identity(n, n);
    let d = q.matrix() - p.matrix();
    let d = (&d + d.adjoint()) * Complex64::from(0.5);
    let norm = eigh(&HermitianMatrix::from_trusted(d.clone())).values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if norm >= 1.0 - 1e-12 {
        return Err(Error::ProjectorsTooFar { norm });
    }
    let x = &id - &d * &d;
    let x = (&x + x.adjoint()) * Complex64::from(0.5);
    let inv_sqrt = eigh(&HermitianMatrix::from_trusted(x)).apply_function(|v| Complex64::from(1.0 / v.sqrt()));
    let core = q.matrix() * p.matrix() + (&id - q.matrix()) * (&id - p.matrix());
    Ok(IntertwinerUnitary { w: inv_sqrt * core, source: p.clone(), target: q.clone() })
}

/// `||(e^{-itH} - W^H e^{-itH_eff} W) phi||` with `phi = Pi psi / ||Pi psi||`.
pub fn peierls_defect(
    full: &Propagator,
    effective: &Propagator,
    pi: &Projector,
    w: &IntertwinerUnitary,
    psi: &WavePacket,
    t: f64,
) -> Result<f64> {
    let phi = projected_state(pi, psi)?;
    defect_for_state(full, effective, w, &phi, t)
}

fn projected_state(pi: &Projector, psi: &WavePacket) -> Result<CVector> {
    if pi.dim() != psi.dim() {
        return Err(Error::DimensionMismatch { expected: pi.dim(), found: psi.dim() });
    }
    let v = pi.apply(psi.coeffs());
    let norm = v.norm();
    if norm < 1e-12 {
        return Err(Error::ZeroProjection);
    }
    Ok(v / Complex64::from(norm))
}

fn defect_for_state(full: &Propagator, effective: &Propagator, w: &IntertwinerUnitary, phi: &CVector, t: f64) -> Result<f64> {
    let exact = full.apply(phi, t)?;
    let moved = &w.w * phi;
    let approx = w.w.adjoint() * effective.apply(&moved, t)?;
    Ok((exact - approx).norm().min(2.0))
}

/// One field value of the defect sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectRow {
    pub field: f64,
    pub n_phi: usize,
    pub times: Vec<f64>,
    pub defects: Vec<f64>,
    /// Least-squares slope through the origin.
    pub slope: f64,
    /// `max d(t) / t` over `t > 0`.
    pub max_ratio: f64,
    pub cluster_gap: f64,
    pub separated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectTable {
    pub rows: Vec<DefectRow>,
    /// Slopes strictly decrease along the rows.
    pub monotone: bool,
}

/// `sum t d / sum t^2`.
pub fn slope_through_origin(times: &[f64], values: &[f64]) -> f64 {
    let num: f64 = times.iter().zip(values).map(|(t, d)| t * d).sum();
    let den: f64 = times.iter().map(|t| t * t).sum();
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Propagation defect of the lowest-level model `2B + P_0 V P_0` against the
/// full truncated Hamiltonian, started from the first basis orbital of the
/// lowest level projected onto the lowest cluster.
pub fn defect_row(basis: &LandauBasisSpec, v: &FourierPotential, times: &[f64]) -> Result<DefectRow> {
    let n = basis.n_phi;
    let dim = basis.dim();
    let h = continuum_hamiltonian(basis, v)?;
    let full = Propagator::new(h.matrix());
    let ev = &full.eigen().values;
    let cluster_gap = if dim > n { ev[n] - ev[n - 1] } else { f64::INFINITY };
    let separated = cluster_gap >= MIN_GAP_FRACTION * 2.0 * basis.b();
    let cut = if dim > n { 0.5 * (ev[n] + ev[n - 1]) } else { f64::INFINITY };
    let pi = full.projection(f64::NEG_INFINITY, cut)?;
    let p0 = Projector::coordinate(dim, 0..n)?;

    let lll = lll_effective(basis, v)?;
    let mut eff = CMatrix::zeros(dim, dim);
    eff.view_mut((0, 0), (n, n)).copy_from(lll.as_matrix());
    for i in 0..n {
        eff[(i, i)] += basis.level_energy(0);
    }
    let effective = Propagator::new(&HermitianMatrix::new(eff)?);
    let w = nagy_intertwiner(&pi, &p0)?;
    let psi = WavePacket::basis_state(dim, basis.index(0, 0))?;
    let phi = projected_state(&pi, &psi)?;
    let defects = times
        .par_iter()
        .map(|&t| defect_for_state(&full, &effective, &w, &phi, t))
        .collect::<Result<Vec<_>>>()?;
    let max_ratio = times.iter().zip(&defects).filter(|(t, _)| **t > 0.0).map(|(t, d)| d / t).fold(0.0, f64::max);
    Ok(DefectRow {
        field: basis.field,
        n_phi: n,
        times: times.to_vec(),
        slope: slope_through_origin(times, &defects),
        defects,
        max_ratio,
        cluster_gap,
        separated,
    })
}

/// Defect rows for each basis and the strict-decrease verdict on the slopes.
pub fn defect_scaling(bases: &[LandauBasisSpec], v: &FourierPotential, times: &[f64]) -> Result<DefectTable> {
    let rows = bases.iter().map(|b| defect_row(b, v, times)).collect::<Result<Vec<_>>>()?;
    let monotone = rows.windows(2).all(|w| w[0].slope > w[1].slope);
    Ok(DefectTable { rows, monotone })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> HermitianMatrix {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let z = if i == j {
                    Complex64::from(rng.random_range(-1.0..1.0))
                } else {
                    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                };
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        HermitianMatrix::new(m).unwrap()
    }

    fn random_state(n: usize, rng: &mut ChaCha8Rng) -> WavePacket {
        let v = CVector::from_fn(n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        WavePacket::normalized(v).unwrap()
    }

    #[test]
    fn zero_time_and_diagonal_phases() {
        let h = HermitianMatrix::from_real_diagonal(&[0.5, -1.0, 2.0]);
        let psi = WavePacket::basis_state(3, 2).unwrap();
        assert_eq!(evolve(&h, &psi, 0.0).unwrap().coeffs(), psi.coeffs());
        let out = evolve(&h, &psi, 0.7).unwrap();
        assert!((out.coeffs()[2] - Complex64::from_polar(1.0, -1.4)).norm() < 1e-14);
        assert!(out.coeffs()[0].norm() < 1e-15);
    }

    #[test]
    fn unitary_group_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_hermitian(12, &mut rng);
        let prop = Propagator::new(&h);
        for _ in 0..10 {
            let psi = random_state(12, &mut rng);
            let (s, t) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let a = prop.evolve(&prop.evolve(&psi, s).unwrap(), t).unwrap();
            let b = prop.evolve(&psi, s + t).unwrap();
            assert!((a.coeffs() - b.coeffs()).norm() < 1e-8);
            assert!((a.norm() - 1.0).abs() < 1e-9);
        }
        let wrong = WavePacket::basis_state(3, 0).unwrap();
        assert!(matches!(evolve(&h, &wrong, 1.0), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn projection_windows() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let h = random_hermitian(10, &mut rng);
        let all = spectral_projection(&h, (-100.0, 100.0)).unwrap();
        assert!((all.matrix() - CMatrix::identity(10, 10)).norm() < 1e-10);
        let none = spectral_projection(&h, (50.0, 60.0)).unwrap();
        assert_eq!(none.rank(), 0);
        let half = spectral_projection(&h, (f64::NEG_INFINITY, 0.0)).unwrap();
        let comm = h.as_matrix() * half.matrix() - half.matrix() * h.as_matrix();
        assert!(comm.norm() < 1e-9);
        let e = eigh(&h).values[3];
        assert!(matches!(spectral_projection(&h, (e, 100.0)), Err(Error::AmbiguousWindow { .. })));
    }

    #[test]
    fn intertwiner_of_equal_projectors_is_identity() {
        let p = Projector::coordinate(5, [0, 2]).unwrap();
        let w = nagy_intertwiner(&p, &p).unwrap();
        assert!((w.w - CMatrix::identity(5, 5)).norm() < 1e-12);
    }

    #[test]
    fn unequal_ranks_have_no_intertwiner() {
        let p = Projector::coordinate(4, [0]).unwrap();
        let q = Projector::coordinate(4, [0, 1]).unwrap();
        assert!(matches!(nagy_intertwiner(&p, &q), Err(Error::ProjectorsTooFar { .. })));
    }

    #[test]
    fn intertwiner_invariants_on_random_nearby_projectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..100 {
            let n = 8;
            let rank = rng.random_range(1..n);
            let h = random_hermitian(n, &mut rng);
            let pert = random_hermitian(n, &mut rng).scaled(0.05);
            let eig_a = eigh(&h);
            let eig_b = eigh(&h.try_add(&pert).unwrap());
            let cols: Vec<usize> = (0..rank).collect();
            let p = Projector::from_orthonormal_columns(&eig_a.vectors.select_columns(&cols)).unwrap();
            let q = Projector::from_orthonormal_columns(&eig_b.vectors.select_columns(&cols)).unwrap();
            match nagy_intertwiner(&p, &q) {
                Ok(w) => {
                    let (u, i) = w.defects();
                    assert!(u < 1e-10, "unitarity {u}");
                    assert!(i < 1e-8, "intertwining {i}");
                }
                // Near-degenerate draws may rotate a whole eigenvector out of the subspace.
                Err(Error::ProjectorsTooFar { .. }) => {}
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn defect_vanishes_for_exact_restriction() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(10, &mut rng);
        let full = Propagator::new(&h);
        let pi = full.projection(f64::NEG_INFINITY, 0.5 * (full.eigen().values[3] + full.eigen().values[4])).unwrap();
        let restricted = HermitianMatrix::new(pi.matrix() * h.as_matrix() * pi.matrix()).unwrap();
        let eff = Propagator::new(&restricted);
        let w = nagy_intertwiner(&pi, &pi).unwrap();
        let psi = random_state(10, &mut rng);
        for t in [0.0, 0.5, 3.0, 10.0] {
            assert!(peierls_defect(&full, &eff, &pi, &w, &psi, t).unwrap() < 1e-8);
        }
        // Transported to a nearby subspace, the defect still only sees the approximation.
        let q = Projector::coordinate(10, 0..4).unwrap();
        if let Ok(w) = nagy_intertwiner(&pi, &q) {
            let moved = HermitianMatrix::new(&w.w * restricted.as_matrix() * w.w.adjoint()).unwrap();
            let eff = Propagator::new(&moved);
            for t in [0.0, 1.0, 4.0] {
                assert!(peierls_defect(&full, &eff, &pi, &w, &psi, t).unwrap() < 1e-8);
            }
        }
    }

    #[test]
    fn zero_projection_is_rejected() {
        let h = HermitianMatrix::from_real_diagonal(&[0.0, 1.0]);
        let full = Propagator::new(&h);
        let pi = Projector::coordinate(2, [1]).unwrap();
        let w = nagy_intertwiner(&pi, &pi).unwrap();
        let psi = WavePacket::basis_state(2, 0).unwrap();
        assert!(matches!(peierls_defect(&full, &full, &pi, &w, &psi, 1.0), Err(Error::ZeroProjection)));
    }

    #[test]
    fn slope_fit() {
        assert!((slope_through_origin(&[0.0, 1.0, 2.0], &[0.0, 2.0, 4.0]) - 2.0).abs() < 1e-15);
        assert_eq!(slope_through_origin(&[0.0], &[0.0]), 0.0);
    }
}
