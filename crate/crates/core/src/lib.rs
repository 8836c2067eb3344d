//! Magnetic lattice and Landau-level operators at desk scale: Bloch fibers
//! and box truncations of the magnetic hopping operator, spectra as interval
//! unions, Chern numbers, a truncated continuum Landau Hamiltonian, effective
//! dynamics and seeded disorder.

// Links the system BLAS/LAPACK used by the banded eigensolver.
use openblas_src as _;

pub mod disorder;
pub mod dynamics;
pub mod error;
pub mod landau;
pub mod lattice;
pub mod spectral;

pub use error::{Error, ErrorKind, Result};
pub use lattice::{BlochFiberFamily, HermitianMatrix, RationalFlux};
pub use spectral::{BandIntervals, Histogram, SpectrumSample};
