//! Truncated Landau Hamiltonian `(p - A)^2 + V` on a magnetic torus.
//!
//! The symmetric-gauge potential `A = B(-y, x)` has curl `b = 2B`; every
//! Landau-level formula below is written in terms of `b`. The torus is an
//! `M x M` block of square cells of side `a` (1 by default, `2 pi` optionally),
//! carrying `N_phi = b (M a)^2 / 2 pi` flux quanta.
//!
//! Basis states `|n, j>`: Landau level `n < N_LL`, guiding-centre index
//! `j < N_phi` (Landau-gauge orbitals centred at `X_j = L j / N_phi`), stored
//! at index `n * N_phi + j`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::matrix::{CMatrix, HermitianMatrix};
use crate::spectral::eigen::eigenvalues_hermitian;
use crate::spectral::sample::{hausdorff, BandIntervals};

const INTEGER_TOL: f64 = 1e-9;

/// Real potential `V(r) = sum_K c_K e^{i K.r}` with `K = (2 pi / (P a)) (kx, ky)`,
/// periodic over `P x P` cells of side `a` (`P = 1` for lattice potentials).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierPotential {
    harmonics: BTreeMap<(i64, i64), Complex64>,
    #[serde(default = "one")]
    period: usize,
}

fn one() -> usize {
    1
}

impl Default for FourierPotential {
    fn default() -> Self {
        FourierPotential { harmonics: BTreeMap::new(), period: 1 }
    }
}

impl FourierPotential {
    pub fn new(harmonics: impl IntoIterator<Item = ((i64, i64), Complex64)>) -> Result<Self> {
        FourierPotential::with_period(harmonics, 1)
    }

    /// Harmonics in units of `2 pi / (period * a)`.
    pub fn with_period(harmonics: impl IntoIterator<Item = ((i64, i64), Complex64)>, period: usize) -> Result<Self> {
        if period == 0 {
            return Err(Error::invalid("potential period must be >= 1 cell"));
        }
        let mut map = BTreeMap::new();
        for (k, c) in harmonics {
            *map.entry(k).or_insert(Complex64::ZERO) += c;
        }
        map.retain(|_, c| *c != Complex64::ZERO);
        let v = FourierPotential { harmonics: map, period };
        v.check_real(1e-12)?;
        Ok(v)
    }

    pub fn zero() -> Self {
        FourierPotential::default()
    }

    /// Period in cells.
    pub fn period(&self) -> usize {
        self.period
    }

    pub fn constant(c: f64) -> Self {
        FourierPotential::new([((0, 0), Complex64::from(c))]).expect("constant is real")
    }

    /// `amp * (2cos(2 pi x / a) + 2cos(2 pi y / a))`.
    pub fn cosine_square(amp: f64) -> Self {
        let c = Complex64::from(amp);
        FourierPotential::new([((1, 0), c), ((-1, 0), c), ((0, 1), c), ((0, -1), c)]).expect("cosines are real")
    }

    pub fn harmonics(&self) -> impl Iterator<Item = ((i64, i64), Complex64)> + '_ {
        self.harmonics.iter().map(|(k, c)| (*k, *c))
    }

    pub fn len(&self) -> usize {
        self.harmonics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.harmonics.is_empty()
    }

    pub fn check_real(&self, tol: f64) -> Result<()> {
        for (&(kx, ky), c) in &self.harmonics {
            let partner = self.harmonics.get(&(-kx, -ky)).copied().unwrap_or(Complex64::ZERO);
            if (partner - c.conj()).norm() > tol {
                return Err(Error::NonRealDispersion { n: kx, m: ky });
            }
        }
        Ok(())
    }

    /// `V(x, y)` for cells of side `a`.
    pub fn evaluate(&self, r: [f64; 2], a: f64) -> f64 {
        let g = 2.0 * PI / (a * self.period as f64);
        self.harmonics
            .iter()
            .map(|(&(kx, ky), c)| (c * Complex64::from_polar(1.0, g * (kx as f64 * r[0] + ky as f64 * r[1]))).re)
            .sum()
    }
}

/// Side of the periodicity cell of the potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellGeometry {
    /// Unit square cell; `V = 2cos(2 pi x) + 2cos(2 pi y)`.
    #[default]
    Unit,
    /// Cell of side `2 pi`; `V = 2cos x + 2cos y`.
    TwoPi,
}

impl CellGeometry {
    pub fn side(self) -> f64 {
        match self {
            CellGeometry::Unit => 1.0,
            CellGeometry::TwoPi => 2.0 * PI,
        }
    }

    /// `B` carrying `n_phi` quanta through `cells x cells` cells.
    pub fn field_for(self, n_phi: usize, cells: usize) -> f64 {
        let a = self.side();
        PI * n_phi as f64 / (a * a * (cells * cells) as f64)
    }
}

/// Validated Landau-level basis on a magnetic torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandauBasisSpec {
    pub field: f64,
    pub n_phi: usize,
    pub n_ll: usize,
    pub cells: usize,
    pub geometry: CellGeometry,
}

impl LandauBasisSpec {
    /// Effective field strength `b = 2B`.
    pub fn b(&self) -> f64 {
        2.0 * self.field
    }

    pub fn cell_side(&self) -> f64 {
        self.geometry.side()
    }

    pub fn torus_side(&self) -> f64 {
        self.cells as f64 * self.cell_side()
    }

    pub fn dim(&self) -> usize {
        self.n_ll * self.n_phi
    }

    pub fn index(&self, level: usize, j: usize) -> usize {
        level * self.n_phi + j
    }

    /// `b (2n + 1)`.
    pub fn level_energy(&self, n: usize) -> f64 {
        self.b() * (2 * n + 1) as f64
    }

    /// Magnetic-translation pair on one level: shift `S|j> = |j+1>` and clock
    /// `C|j> = e^{i 2 pi j / N_phi}|j>`, with `C S = e^{i 2 pi / N_phi} S C`.
    pub fn clock_shift(&self) -> (CMatrix, CMatrix) {
        let n = self.n_phi;
        let clock = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::from_polar(1.0, 2.0 * PI * i as f64 / n as f64)
            } else {
                Complex64::ZERO
            }
        });
        let shift = CMatrix::from_fn(n, n, |i, j| if i == (j + 1) % n { Complex64::ONE } else { Complex64::ZERO });
        (clock, shift)
    }

    /// Reciprocal vector of harmonic `(kx, ky)` of a cell-periodic potential.
    pub fn wave_vector(&self, harmonic: (i64, i64)) -> [f64; 2] {
        self.wave_vector_with_period(harmonic, 1)
    }

    /// Reciprocal vector of a harmonic of a potential with period `period` cells.
    pub fn wave_vector_with_period(&self, harmonic: (i64, i64), period: usize) -> [f64; 2] {
        let g = 2.0 * PI / (self.cell_side() * period as f64);
        [g * harmonic.0 as f64, g * harmonic.1 as f64]
    }

    /// Largest `||[H_0, T]||` over the magnetic-translation generators
    /// acting on all levels.
    pub fn translation_commutator_norm(&self) -> f64 {
        let h0 = kinetic(self);
        let (clock, shift) = self.clock_shift();
        let id = CMatrix::identity(self.n_ll, self.n_ll);
        [clock, shift]
            .iter()
            .map(|t| {
                let full = id.kronecker(t);
                (h0.as_matrix() * &full - &full * h0.as_matrix()).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Basis for field `B` with `n_phi` flux quanta on a torus of unit cells.
pub fn landau_torus_basis(field: f64, n_phi: usize, n_ll: usize) -> Result<LandauBasisSpec> {
    landau_torus_basis_with(field, n_phi, n_ll, CellGeometry::Unit)
}

/// As [`landau_torus_basis`], choosing the cell side. The cell count `M` is
/// solved from `2B (M a)^2 = 2 pi N_phi`; non-integral `M` is infeasible.
pub fn landau_torus_basis_with(field: f64, n_phi: usize, n_ll: usize, geometry: CellGeometry) -> Result<LandauBasisSpec> {
    if n_phi == 0 || n_ll == 0 {
        return Err(Error::invalid("N_phi and N_LL must be >= 1"));
    }
    if !(field > 0.0 && field.is_finite()) {
        return Err(Error::invalid(format!("field must be positive, got {field}")));
    }
    let cells_exact = (geometry.field_for(n_phi, 1) / field).sqrt();
    let cells = cells_exact.round().max(1.0);
    if (cells_exact - cells).abs() > INTEGER_TOL * cells.max(1.0) {
        return Err(Error::InfeasibleQuantization {
            requested: field,
            n_phi,
            nearest: geometry.field_for(n_phi, cells as usize),
        });
    }
    Ok(LandauBasisSpec { field, n_phi, n_ll, cells: cells as usize, geometry })
}

/// Nearest quantizable field on a `cells x cells` torus: `N_phi` is the
/// rounded flux count (at least one).
pub fn snap_field(target: f64, cells: usize, geometry: CellGeometry) -> Result<(f64, usize)> {
    if !(target > 0.0 && target.is_finite()) || cells == 0 {
        return Err(Error::invalid("field must be positive and cells >= 1"));
    }
    let per_quantum = geometry.field_for(1, cells);
    let n_phi = ((target / per_quantum).round() as usize).max(1);
    Ok((geometry.field_for(n_phi, cells), n_phi))
}

/// Generalized Laguerre polynomial `L_n^{(k)}(x)`.
pub fn laguerre(n: usize, k: usize, x: f64) -> f64 {
    let k = k as f64;
    let (mut prev, mut cur) = (1.0, 1.0 + k - x);
    if n == 0 {
        return prev;
    }
    for j in 1..n {
        let j = j as f64;
        let next = ((2.0 * j + 1.0 + k - x) * cur - (j + k) * prev) / (j + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `<n| D(alpha) |m>` for the oscillator displacement operator.
pub fn displacement_element(n: usize, m: usize, alpha: Complex64) -> Complex64 {
    let x = alpha.norm_sqr();
    let gauss = (-x / 2.0).exp();
    let (hi, lo, base) = if n >= m { (n, m, alpha) } else { (m, n, -alpha.conj()) };
    // sqrt(lo! / hi!)
    let ratio = ((lo + 1)..=hi).fold(1.0, |acc, i| acc / (i as f64).sqrt());
    base.powu((hi - lo) as u32) * (ratio * gauss * laguerre(lo, hi - lo, x))
}

/// Inter-level factor of `e^{i K.r}`: `N_LL x N_LL` matrix of displacement
/// elements at `alpha = l (i Kx - Ky) / sqrt 2`, `l^2 = 1/b`.
pub fn level_factor(basis: &LandauBasisSpec, k: [f64; 2]) -> CMatrix {
    let l = 1.0 / basis.b().sqrt();
    let alpha = Complex64::new(-k[1], k[0]) * (l / 2f64.sqrt());
    CMatrix::from_fn(basis.n_ll, basis.n_ll, |n, m| displacement_element(n, m, alpha))
}

/// Intra-level projective translation `tau(K)`:
/// `tau[(j + c) mod N, j] = e^{i pi a (2j + c) / N}` for `K = (2 pi / L)(a, c)`.
pub fn projective_translation(basis: &LandauBasisSpec, k: [f64; 2]) -> Result<CMatrix> {
    let (a, c) = torus_harmonic(basis, k)?;
    let n = basis.n_phi as i64;
    let mut t = CMatrix::zeros(basis.n_phi, basis.n_phi);
    for j in 0..n {
        let row = (j + c).rem_euclid(n) as usize;
        let phase = PI * a as f64 * (2 * j + c) as f64 / n as f64;
        t[(row, j as usize)] = Complex64::from_polar(1.0, phase);
    }
    Ok(t)
}

fn torus_harmonic(basis: &LandauBasisSpec, k: [f64; 2]) -> Result<(i64, i64)> {
    let scale = basis.torus_side() / (2.0 * PI);
    let (ax, cy) = (k[0] * scale, k[1] * scale);
    if !(ax.is_finite() && cy.is_finite()) || (ax - ax.round()).abs() > INTEGER_TOL || (cy - cy.round()).abs() > INTEGER_TOL {
        return Err(Error::IncompatibleWaveVector { kx: k[0], ky: k[1] });
    }
    Ok((ax.round() as i64, cy.round() as i64))
}

/// Matrix of `e^{i K.r}` in the truncated basis: `level_factor (x) tau(K)`.
pub fn plane_wave_element(basis: &LandauBasisSpec, k: [f64; 2]) -> Result<CMatrix> {
    let tau = projective_translation(basis, k)?;
    Ok(level_factor(basis, k).kronecker(&tau))
}

fn kinetic(basis: &LandauBasisSpec) -> HermitianMatrix {
    let diag: Vec<f64> = (0..basis.n_ll).flat_map(|n| std::iter::repeat(basis.level_energy(n)).take(basis.n_phi)).collect();
    HermitianMatrix::from_real_diagonal(&diag)
}

fn potential_matrix(basis: &LandauBasisSpec, v: &FourierPotential) -> Result<CMatrix> {
    let terms: Vec<((i64, i64), Complex64)> = v.harmonics().collect();
    let parts = terms
        .par_iter()
        .map(|&(h, c)| plane_wave_element(basis, basis.wave_vector_with_period(h, v.period())).map(|m| m * c))
        .collect::<Result<Vec<_>>>()?;
    // Summed in harmonic order so the result does not depend on scheduling.
    let mut total = CMatrix::zeros(basis.dim(), basis.dim());
    for p in parts {
        total += p;
    }
    Ok(total)
}

#[derive(Debug, Clone)]
pub struct ContinuumHamiltonian {
    pub basis: LandauBasisSpec,
    pub potential: FourierPotential,
    matrix: HermitianMatrix,
}

impl ContinuumHamiltonian {
    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        eigenvalues_hermitian(&self.matrix)
    }

    /// `H - H_kinetic`, the potential in the truncated basis.
    pub fn potential_part(&self) -> CMatrix {
        self.matrix.as_matrix() - kinetic(&self.basis).as_matrix()
    }

    /// Block `<m, . | X | n, .>` of a basis-sized matrix.
    pub fn level_block(&self, m: &CMatrix, row_level: usize, col_level: usize) -> CMatrix {
        let n = self.basis.n_phi;
        m.view((row_level * n, col_level * n), (n, n)).into_owned()
    }
}

/// `H = sum_n b (2n + 1) P_n + sum_K c_K e^{i K.r}` in the truncated basis.
pub fn continuum_hamiltonian(basis: &LandauBasisSpec, v: &FourierPotential) -> Result<ContinuumHamiltonian> {
    let mut m = potential_matrix(basis, v)?;
    m += kinetic(basis).as_matrix();
    // The truncated potential is Hermitian up to rounding; enforce exactly.
    let m = (&m + m.adjoint()) * Complex64::from(0.5);
    Ok(ContinuumHamiltonian { basis: basis.clone(), potential: v.clone(), matrix: HermitianMatrix::new(m)? })
}

/// Lowest-level compression `sum_K c_K e^{-|K|^2 / 4b} tau(K)`.
pub fn lll_effective(basis: &LandauBasisSpec, v: &FourierPotential) -> Result<HermitianMatrix> {
    let n = basis.n_phi;
    let mut m = CMatrix::zeros(n, n);
    for (h, c) in v.harmonics() {
        let k = basis.wave_vector_with_period(h, v.period());
        let weight = (-(k[0] * k[0] + k[1] * k[1]) / (4.0 * basis.b())).exp();
        m += projective_translation(basis, k)? * (c * weight);
    }
    let m = (&m + m.adjoint()) * Complex64::from(0.5);
    HermitianMatrix::new(m)
}

/// Flux of the Hofstadter model that the lowest-level compression of the
/// cosine lattice reproduces: `M^2 / N_phi mod 1`, the inverse of the flux
/// per cell.
pub fn dual_flux(basis: &LandauBasisSpec) -> (i64, i64) {
    let n = basis.n_phi as i64;
    let m = basis.cells as i64;
    ((m * m).rem_euclid(n), n)
}

/// One row of the strong-field comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongFieldRow {
    pub field: f64,
    pub n_phi: usize,
    pub cells: usize,
    /// Hausdorff distance between the shifted lowest cluster and the
    /// lowest-level compression.
    pub distance: f64,
    /// Gap above the lowest `N_phi` eigenvalues.
    pub cluster_gap: f64,
    /// Spread of the lowest cluster.
    pub cluster_width: f64,
    /// `sum_K |c_K| |<N_LL | e^{iK.r} | N_LL - 1>|`, a truncation proxy.
    pub next_level_coupling: f64,
    /// False when the cluster gap is below the separation threshold.
    pub separated: bool,
}

/// Default required cluster gap, as a fraction of the level spacing `2b`.
pub const MIN_GAP_FRACTION: f64 = 0.25;

/// Lowest `N_phi` eigenvalues of the full Hamiltonian shifted by `-2B`,
/// compared with the lowest-level compression, one row per basis.
pub fn strong_field_report(bases: &[LandauBasisSpec], v: &FourierPotential) -> Result<Vec<StrongFieldRow>> {
    bases.par_iter().map(|basis| strong_field_row(basis, v, MIN_GAP_FRACTION)).collect()
}

pub fn strong_field_row(basis: &LandauBasisSpec, v: &FourierPotential, min_gap_fraction: f64) -> Result<StrongFieldRow> {
    let n = basis.n_phi;
    let h = continuum_hamiltonian(basis, v)?;
    let ev = h.eigenvalues()?;
    let cluster: Vec<f64> = ev[..n].iter().map(|e| e - basis.level_energy(0)).collect();
    let cluster_gap = if ev.len() > n { ev[n] - ev[n - 1] } else { f64::INFINITY };
    let eff = eigenvalues_hermitian(&lll_effective(basis, v)?)?;
    let as_set = |xs: &[f64]| BandIntervals::from_intervals(xs.iter().map(|&x| (x, x)).collect(), 0.0);
    let distance = hausdorff(&as_set(&cluster)?, &as_set(&eff)?)?;
    let probe = LandauBasisSpec { n_ll: basis.n_ll + 1, ..basis.clone() };
    let next_level_coupling = v
        .harmonics()
        .map(|(hm, c)| {
            let f = level_factor(&probe, probe.wave_vector_with_period(hm, v.period()));
            c.norm() * f[(basis.n_ll, basis.n_ll - 1)].norm()
        })
        .sum();
    Ok(StrongFieldRow {
        field: basis.field,
        n_phi: n,
        cells: basis.cells,
        distance,
        cluster_gap,
        cluster_width: cluster[n - 1] - cluster[0],
        next_level_coupling,
        separated: cluster_gap >= min_gap_fraction * 2.0 * basis.b(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(n_phi: usize, cells: usize, n_ll: usize) -> LandauBasisSpec {
        landau_torus_basis(CellGeometry::Unit.field_for(n_phi, cells), n_phi, n_ll).unwrap()
    }

    #[test]
    fn quantization_bookkeeping() {
        // One flux quantum per unit cell.
        let b = landau_torus_basis(PI, 9, 2).unwrap();
        assert_eq!(b.cells, 3);
        assert_eq!(b.n_phi, b.cells * b.cells);
        let err = landau_torus_basis(10.0, 13, 6).unwrap_err();
        match err {
            Error::InfeasibleQuantization { nearest, .. } => {
                assert!((nearest - PI * 13.0 / 4.0).abs() < 1e-12);
            }
            e => panic!("unexpected {e}"),
        }
        let two_pi = landau_torus_basis_with(1.0 / (4.0 * PI), 1, 1, CellGeometry::TwoPi).unwrap();
        assert_eq!(two_pi.cells, 1);
    }

    #[test]
    fn snapping() {
        let (b, n) = snap_field(10.0, 2, CellGeometry::Unit).unwrap();
        assert_eq!(n, 13);
        assert!(landau_torus_basis(b, n, 6).is_ok());
        assert_eq!(snap_field(0.01, 2, CellGeometry::Unit).unwrap().1, 1);
    }

    #[test]
    fn laguerre_low_orders() {
        for &x in &[0.0, 0.3, 2.5] {
            assert_eq!(laguerre(0, 3, x), 1.0);
            assert!((laguerre(1, 0, x) - (1.0 - x)).abs() < 1e-14);
            assert!((laguerre(2, 0, x) - (x * x / 2.0 - 2.0 * x + 1.0)).abs() < 1e-13);
            assert!((laguerre(2, 1, x) - (x * x / 2.0 - 3.0 * x + 3.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_wave_vector_is_identity() {
        let b = basis(5, 2, 3);
        let e = plane_wave_element(&b, [0.0, 0.0]).unwrap();
        assert!((e - CMatrix::identity(15, 15)).norm() < 1e-14);
    }

    #[test]
    fn lowest_level_diagonal_at_k_squared_2b() {
        let b = basis(5, 2, 3);
        // |alpha|^2 = |K|^2 / 2b = 1.
        let kx = (2.0 * b.b()).sqrt();
        let f = level_factor(&b, [kx, 0.0]);
        assert!((f[(0, 0)] - Complex64::from((-0.5f64).exp())).norm() < 1e-14);
    }

    #[test]
    fn adjoint_is_negated_wave_vector() {
        let b = basis(7, 2, 4);
        for h in [(1, 0), (0, 1), (1, -2), (3, 1)] {
            let k = b.wave_vector(h);
            let e = plane_wave_element(&b, k).unwrap();
            let e_minus = plane_wave_element(&b, [-k[0], -k[1]]).unwrap();
            assert!((e.adjoint() - e_minus).norm() < 1e-12, "{h:?}");
        }
    }

    #[test]
    fn incompatible_wave_vector() {
        let b = basis(5, 2, 2);
        assert!(matches!(plane_wave_element(&b, [0.3, 0.0]), Err(Error::IncompatibleWaveVector { .. })));
    }

    #[test]
    fn free_spectrum_is_landau_levels() {
        let b = basis(6, 2, 4);
        let h = continuum_hamiltonian(&b, &FourierPotential::zero()).unwrap();
        let ev = h.eigenvalues().unwrap();
        for (i, e) in ev.iter().enumerate() {
            let want = b.level_energy(i / 6);
            assert!((e - want).abs() <= 1e-10 * want);
        }
        assert!(b.translation_commutator_norm() < 1e-10);
    }

    #[test]
    fn constant_potential_shifts_levels() {
        let b = basis(4, 1, 3);
        let h = continuum_hamiltonian(&b, &FourierPotential::constant(0.7)).unwrap();
        let ev = h.eigenvalues().unwrap();
        for (i, e) in ev.iter().enumerate() {
            assert!((e - b.level_energy(i / 4) - 0.7).abs() < 1e-12);
        }
        let lll = lll_effective(&b, &FourierPotential::constant(0.7)).unwrap();
        assert!((lll.as_matrix() - CMatrix::identity(4, 4) * Complex64::from(0.7)).norm() < 1e-14);
    }

    #[test]
    fn lll_is_the_lowest_block() {
        let b = basis(7, 2, 5);
        let v = FourierPotential::cosine_square(1.0);
        let h = continuum_hamiltonian(&b, &v).unwrap();
        let block = h.level_block(&h.potential_part(), 0, 0);
        let lll = lll_effective(&b, &v).unwrap();
        assert!((block - lll.as_matrix()).norm() < 1e-12);
    }

    #[test]
    fn rejects_complex_potential() {
        assert!(FourierPotential::new([((1, 0), Complex64::new(0.0, 1.0))]).is_err());
    }

    #[test]
    fn potential_evaluation() {
        let v = FourierPotential::cosine_square(1.0);
        assert!((v.evaluate([0.0, 0.0], 1.0) - 4.0).abs() < 1e-14);
        assert!((v.evaluate([0.5, 0.0], 1.0) - 0.0).abs() < 1e-14);
        assert!((v.evaluate([PI, PI], 2.0 * PI) + 4.0).abs() < 1e-13);
    }
}
