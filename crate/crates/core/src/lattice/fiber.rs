//! Magnetic Bloch fibers: q x q matrix families over the Brillouin zone at
//! rational flux p/q.
//!
//! All fibers built here share one convention: the Bloch phase `e^{i k1}` is
//! distributed over every bond of the q-site ring (the cyclic shift `S`,
//! `S|j> = |j+1 mod q>`), and the flux enters through the clock
//! `C|j> = e^{i 2 pi p j / q}|j>`. With this choice a shift of `k1` by
//! `2 pi / q` is a constant unitary conjugation and the family is exactly
//! `2 pi`-periodic in `k2`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::flux::RationalFlux;
use super::matrix::{CMatrix, HermitianMatrix};
use crate::error::{Error, Result};

pub type FiberFn = dyn Fn([f64; 2]) -> HermitianMatrix + Send + Sync;

/// Which construction produced a fiber family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Gauge {
    /// Landau gauge, magnetic-Bloch reduced, phases distributed over the ring.
    Landau,
    /// Harper fibers parametrised by `(k, 2 pi theta)`.
    Harper,
    /// Weyl-ordered Peierls substitution of a band dispersion.
    Peierls,
    Custom,
}

impl fmt::Display for Gauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Gauge::Landau => "landau",
            Gauge::Harper => "harper",
            Gauge::Peierls => "peierls",
            Gauge::Custom => "custom",
        };
        f.write_str(s)
    }
}

/// Fundamental domain of a fiber family together with the boundary twists:
/// `H(k + extent[i] e_i) = twist[i] H(k) twist[i]^H`. A missing twist means
/// the family is strictly periodic in that direction.
#[derive(Debug, Clone)]
pub struct FiberZone {
    pub extent: [f64; 2],
    pub twist: [Option<CMatrix>; 2],
}

impl FiberZone {
    pub fn periodic() -> Self {
        FiberZone { extent: [2.0 * PI, 2.0 * PI], twist: [None, None] }
    }
}

/// Map from Brillouin-zone point `k = (k1, k2)` to a Hermitian fiber matrix.
#[derive(Clone)]
pub struct BlochFiberFamily {
    flux: RationalFlux,
    dim: usize,
    gauge: Gauge,
    zone: FiberZone,
    slope_bound: [f64; 2],
    evaluator: Arc<FiberFn>,
}

impl fmt::Debug for BlochFiberFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlochFiberFamily")
            .field("flux", &self.flux)
            .field("dim", &self.dim)
            .field("gauge", &self.gauge)
            .field("zone", &self.zone.extent)
            .field("slope_bound", &self.slope_bound)
            .finish()
    }
}

impl BlochFiberFamily {
    /// Generic family. `slope_bound[i]` must bound `||dH/dk_i||` everywhere;
    /// it is used for grid resolution estimates and gap certification.
    pub fn new<F>(flux: RationalFlux, dim: usize, gauge: Gauge, zone: FiberZone, slope_bound: [f64; 2], f: F) -> Self
    where
        F: Fn([f64; 2]) -> HermitianMatrix + Send + Sync + 'static,
    {
        BlochFiberFamily { flux, dim, gauge, zone, slope_bound, evaluator: Arc::new(f) }
    }

    pub fn flux(&self) -> RationalFlux {
        self.flux
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gauge(&self) -> Gauge {
        self.gauge
    }

    pub fn zone(&self) -> &FiberZone {
        &self.zone
    }

    pub fn slope_bound(&self) -> [f64; 2] {
        self.slope_bound
    }

    pub fn at(&self, k: [f64; 2]) -> HermitianMatrix {
        (self.evaluator)(k)
    }
}

fn shift_clock_phase(flux: RationalFlux, j: usize) -> f64 {
    2.0 * PI * flux.p() as f64 * j as f64 / flux.q() as f64
}

/// Adds `phase * S^n` (shift by `n` sites, cyclic) to `m`.
fn add_shift(m: &mut CMatrix, n: i64, phase: Complex64) {
    let q = m.nrows() as i64;
    for j in 0..q {
        let row = (j + n).rem_euclid(q) as usize;
        m[(row, j as usize)] += phase;
    }
}

/// Diagonal `e^{i 2 pi p j / q}` phases; the `k1 -> k1 + 2 pi / q` twist.
fn ring_twist(q: usize) -> CMatrix {
    CMatrix::from_fn(q, q, |i, j| {
        if i == j {
            Complex64::from_polar(1.0, 2.0 * PI * i as f64 / q as f64)
        } else {
            Complex64::ZERO
        }
    })
}

fn hofstadter_matrix(flux: RationalFlux, k: [f64; 2]) -> HermitianMatrix {
    let q = flux.dim();
    let mut m = CMatrix::zeros(q, q);
    let hop = Complex64::from_polar(1.0, k[0]);
    add_shift(&mut m, 1, hop);
    add_shift(&mut m, -1, hop.conj());
    for j in 0..q {
        m[(j, j)] += 2.0 * (k[1] + shift_clock_phase(flux, j)).cos();
    }
    HermitianMatrix::from_trusted(m)
}

/// Landau-gauge magnetic Bloch fiber of the nearest-neighbour magnetic
/// hopping operator: diagonal `2cos(k2 + 2 pi (p/q) j)`, bond hops `e^{i k1}`.
pub fn hofstadter_fiber(flux: RationalFlux, k: [f64; 2]) -> Result<HermitianMatrix> {
    RationalFlux::new(flux.p(), flux.q())?;
    if !(k[0].is_finite() && k[1].is_finite()) {
        return Err(Error::invalid("k must be finite"));
    }
    Ok(hofstadter_matrix(flux, k))
}

fn magnetic_zone(flux: RationalFlux) -> FiberZone {
    let q = flux.dim();
    if q == 1 {
        return FiberZone::periodic();
    }
    FiberZone { extent: [2.0 * PI / q as f64, 2.0 * PI], twist: [Some(ring_twist(q)), None] }
}

/// The Landau-gauge fiber family at `flux`, with its magnetic Brillouin zone
/// `[0, 2 pi / q) x [0, 2 pi)`.
pub fn hofstadter_family(flux: RationalFlux) -> BlochFiberFamily {
    BlochFiberFamily::new(flux, flux.dim(), Gauge::Landau, magnetic_zone(flux), [2.0, 2.0], move |k| {
        hofstadter_matrix(flux, k)
    })
}

/// Bloch-reduced fiber of the critical almost-Mathieu operator
/// `xi_{n+1} + xi_{n-1} + 2cos(2 pi (theta + n alpha)) xi_n` at `alpha = p/q`.
pub fn harper_fiber(flux: RationalFlux, theta: f64, k: f64) -> Result<HermitianMatrix> {
    RationalFlux::new(flux.p(), flux.q())?;
    if !(theta.is_finite() && k.is_finite()) {
        return Err(Error::invalid("theta and k must be finite"));
    }
    Ok(hofstadter_matrix(flux, [k, 2.0 * PI * theta]))
}

/// Harper fibers as a family over `(k, theta)`, with `k2 = 2 pi theta`.
pub fn harper_family(flux: RationalFlux) -> BlochFiberFamily {
    let zone = magnetic_zone(flux);
    BlochFiberFamily::new(flux, flux.dim(), Gauge::Harper, zone, [2.0, 2.0], move |k| hofstadter_matrix(flux, k))
}

/// Band dispersion `E(k) = sum c_nm e^{i(n k1 + m k2)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierDispersion {
    harmonics: BTreeMap<(i64, i64), Complex64>,
}

impl FourierDispersion {
    /// Duplicated harmonics are summed. Reality is checked by [`peierls_quantize`].
    pub fn new(harmonics: impl IntoIterator<Item = (i64, i64, Complex64)>) -> Self {
        let mut map = BTreeMap::new();
        for (n, m, c) in harmonics {
            *map.entry((n, m)).or_insert(Complex64::ZERO) += c;
        }
        FourierDispersion { harmonics: map }
    }

    pub fn constant(c: f64) -> Self {
        FourierDispersion::new([(0, 0, c.into())])
    }

    /// `2cos k1 + 2cos k2`, the nearest-neighbour square-lattice band.
    pub fn square_lattice() -> Self {
        let one = Complex64::ONE;
        FourierDispersion::new([(1, 0, one), (-1, 0, one), (0, 1, one), (0, -1, one)])
    }

    /// Adds `amp * cos(n k1 + m k2)`.
    pub fn with_cosine(mut self, n: i64, m: i64, amp: f64) -> Self {
        let half = Complex64::new(amp / 2.0, 0.0);
        *self.harmonics.entry((n, m)).or_insert(Complex64::ZERO) += half;
        *self.harmonics.entry((-n, -m)).or_insert(Complex64::ZERO) += half;
        self
    }

    pub fn harmonics(&self) -> impl Iterator<Item = (i64, i64, Complex64)> + '_ {
        self.harmonics.iter().map(|(&(n, m), &c)| (n, m, c))
    }

    pub fn evaluate(&self, k: [f64; 2]) -> Complex64 {
        self.harmonics().map(|(n, m, c)| c * Complex64::from_polar(1.0, n as f64 * k[0] + m as f64 * k[1])).sum()
    }

    /// Checks `c_{-n,-m} = conj(c_{n,m})` to `tol`.
    pub fn check_real(&self, tol: f64) -> Result<()> {
        for (&(n, m), &c) in &self.harmonics {
            let partner = self.harmonics.get(&(-n, -m)).copied().unwrap_or(Complex64::ZERO);
            if (partner - c.conj()).norm() > tol {
                return Err(Error::NonRealDispersion { n, m });
            }
        }
        Ok(())
    }
}

/// Leading-order Peierls substitution at rational flux.
///
/// Harmonic `(n, m)` becomes `c e^{i(n k1 + m k2)} e^{i pi n m p/q} S^n C^m`,
/// the Weyl-symmetrised product of the shift/clock pair (`C S = e^{i 2 pi p/q} S C`).
/// For `2cos k1 + 2cos k2` this reproduces [`hofstadter_fiber`] exactly.
pub fn peierls_quantize(disp: &FourierDispersion, flux: RationalFlux) -> Result<BlochFiberFamily> {
    disp.check_real(1e-12)?;
    let q = flux.dim();
    let alpha = flux.value();
    let terms: Vec<(i64, i64, Complex64, CMatrix)> = disp
        .harmonics()
        .filter(|(_, _, c)| c.norm() > 0.0)
        .map(|(n, m, c)| {
            let weyl = Complex64::from_polar(1.0, PI * (n * m) as f64 * alpha);
            // (S^n C^m)|j> = omega^{m j} |j + n>
            let mut op = CMatrix::zeros(q, q);
            for j in 0..q {
                let row = (j as i64 + n).rem_euclid(q as i64) as usize;
                op[(row, j)] = weyl * Complex64::from_polar(1.0, 2.0 * PI * alpha * (m as f64) * j as f64);
            }
            (n, m, c, op)
        })
        .collect();
    let slope = [
        terms.iter().map(|(n, _, c, _)| c.norm() * n.abs() as f64).sum(),
        terms.iter().map(|(_, m, c, _)| c.norm() * m.abs() as f64).sum(),
    ];
    let zone = magnetic_zone(flux);
    Ok(BlochFiberFamily::new(flux, q, Gauge::Peierls, zone, slope, move |k| {
        let mut h = CMatrix::zeros(q, q);
        for (n, m, c, op) in &terms {
            let bloch = Complex64::from_polar(1.0, *n as f64 * k[0] + *m as f64 * k[1]);
            h += op * (*c * bloch);
        }
        // Conjugate harmonics cancel the imaginary parts only up to rounding.
        let herm = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
        HermitianMatrix::from_trusted(herm)
    }))
}
