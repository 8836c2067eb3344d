//! Shared fixtures for the criterion benchmarks in `benches/`.

use magspec_core::RationalFlux;

/// Fluxes with small, medium and large denominators.
pub fn fluxes() -> Vec<RationalFlux> {
    [(1, 3), (2, 7), (5, 13)].into_iter().map(|(p, q)| RationalFlux::new(p, q).expect("valid flux")).collect()
}
