pub mod chern;
pub mod dos;
pub mod eigen;
pub mod sample;

pub use chern::{chern_numbers, ChernReport};
pub use dos::{dos, DosParams, Histogram};
pub use eigen::{eigenvalues_hermitian, eigh, Eigh};
pub use sample::{band_intervals, hausdorff, spectrum_union, BandIntervals, FiberSweep, Provenance, SpectrumSample};
