//! Finite L x L truncations of the symmetric-gauge magnetic hopping operator
//!
//! `(H xi)_{n,m} = e^{i2 pi m B} xi_{n+1,m} + e^{-i2 pi m B} xi_{n-1,m}
//!               + e^{-i2 pi n B} xi_{n,m+1} + e^{i2 pi n B} xi_{n,m-1}`.
//!
//! Sites are indexed lexicographically, `index = m * L + n` (`n` along x).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::matrix::{CMatrix, HermitianMatrix};
use crate::error::{Error, Result};
use crate::spectral::eigen::eigenvalues_hermitian_permuted;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// Bonds leaving the box are dropped.
    Open,
    /// Torus with magnetic translations; requires `2 B L^2` integral.
    MagneticPeriodic,
}

#[derive(Debug, Clone)]
pub struct BoxOperator {
    side: usize,
    boundary: Boundary,
    field: f64,
    matrix: HermitianMatrix,
}

const QUANTIZATION_TOL: f64 = 1e-9;

impl BoxOperator {
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// The `B` the operator was built with.
    pub fn field(&self) -> f64 {
        self.field
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn site(&self, n: usize, m: usize) -> usize {
        m * self.side + n
    }

    /// All eigenvalues, ascending. Uses a row ordering that keeps the torus
    /// banded (bandwidth `2L`) so large boxes go through the banded solver.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        eigenvalues_hermitian_permuted(&self.matrix, &self.banded_order())
    }

    /// Rows in the order 0, L-1, 1, L-2, ... so that the wrap bond between the
    /// first and last row becomes a short one.
    fn banded_order(&self) -> Vec<usize> {
        let l = self.side;
        let mut rows = Vec::with_capacity(l);
        let (mut lo, mut hi) = (0usize, l - 1);
        while lo <= hi {
            rows.push(lo);
            if hi != lo {
                rows.push(hi);
            }
            lo += 1;
            if hi == 0 {
                break;
            }
            hi -= 1;
        }
        rows.iter().flat_map(|&m| (0..l).map(move |n| m * l + n)).collect()
    }

    /// Hopping phase (argument) for the move `from -> to`, i.e. `arg H[to][from]`.
    fn hop_phase(&self, from: usize, to: usize) -> f64 {
        self.matrix.get(to, from).arg()
    }

    /// Flux through the counterclockwise plaquette with lower-left corner `(n, m)`,
    /// in units of the flux quantum, reduced to `[0, 1)`. Wrap plaquettes are
    /// allowed on the torus.
    pub fn plaquette_flux_at(&self, n: usize, m: usize) -> Result<f64> {
        let l = self.side;
        let interior = n + 1 < l && m + 1 < l;
        if !interior && (self.boundary == Boundary::Open || l < 3) {
            return Err(Error::invalid(format!("no plaquette at ({n}, {m}) in a side-{l} box")));
        }
        let (n1, m1) = ((n + 1) % l, (m + 1) % l);
        let corners = [self.site(n, m), self.site(n1, m), self.site(n1, m1), self.site(n, m1)];
        let total: f64 = (0..4).map(|i| self.hop_phase(corners[i], corners[(i + 1) % 4])).sum();
        Ok((total / (2.0 * PI)).rem_euclid(1.0))
    }
}

/// Builds the symmetric-gauge box operator at field `b` on an `L x L` box.
pub fn symmetric_gauge_box(b: f64, side: usize, boundary: Boundary) -> Result<BoxOperator> {
    if side < 2 {
        return Err(Error::invalid(format!("box side must be >= 2, got {side}")));
    }
    if !b.is_finite() {
        return Err(Error::invalid("field must be finite"));
    }
    let l = side;
    if boundary == Boundary::MagneticPeriodic {
        let total = 2.0 * b * (l * l) as f64;
        if (total - total.round()).abs() > QUANTIZATION_TOL {
            return Err(Error::TorusFlux { field: b, side, total });
        }
    }
    let idx = |n: usize, m: usize| m * l + n;
    let mut h = CMatrix::zeros(l * l, l * l);
    let phase = |theta: f64| Complex64::from_polar(1.0, theta);
    // Adds the amplitude for hopping `from -> to` and its Hermitian partner.
    let mut bond = |to: usize, from: usize, amp: Complex64| {
        h[(to, from)] += amp;
        h[(from, to)] += amp.conj();
    };
    for m in 0..l {
        for n in 0..l {
            // (n,m) -> (n+1,m): H[(n+1,m),(n,m)] = e^{-i 2 pi m B}
            if n + 1 < l {
                bond(idx(n + 1, m), idx(n, m), phase(-2.0 * PI * m as f64 * b));
            }
            // (n,m) -> (n,m+1): H[(n,m+1),(n,m)] = e^{i 2 pi n B}
            if m + 1 < l {
                bond(idx(n, m + 1), idx(n, m), phase(2.0 * PI * n as f64 * b));
            }
        }
    }
    if boundary == Boundary::MagneticPeriodic {
        // Quasi-periodicity psi(n+L, m) = e^{i 2 pi L B m} psi(n, m) and
        // psi(n, m+L) = e^{-i 2 pi L B n} psi(n, m) keeps H invariant.
        let lb = l as f64 * b;
        for m in 0..l {
            // (L-1,m) -> (0,m)
            bond(idx(0, m), idx(l - 1, m), phase(-2.0 * PI * m as f64 * (b + lb)));
        }
        for n in 0..l {
            // (n,L-1) -> (n,0)
            bond(idx(n, 0), idx(n, l - 1), phase(2.0 * PI * n as f64 * (b + lb)));
        }
    }
    Ok(BoxOperator { side, boundary, field: b, matrix: HermitianMatrix::new(h)? })
}

/// Flux through the counterclockwise plaquette at the box origin.
pub fn plaquette_flux(op: &BoxOperator) -> Result<f64> {
    op.plaquette_flux_at(0, 0)
}

/// `H + diag(field)`, with the field indexed like the sites.
pub fn add_onsite_disorder(op: &BoxOperator, field: &[f64]) -> Result<BoxOperator> {
    let n = op.side * op.side;
    if field.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: field.len() });
    }
    let mut h = op.matrix.as_matrix().clone();
    for (i, v) in field.iter().enumerate() {
        h[(i, i)] += *v;
    }
    Ok(BoxOperator { matrix: HermitianMatrix::from_trusted(h), ..op.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circular_gap(a: f64, b: f64) -> f64 {
        let d = (a - b).rem_euclid(1.0);
        d.min(1.0 - d)
    }

    #[test]
    fn zero_field_open_box_is_grid_adjacency() {
        let op = symmetric_gauge_box(0.0, 3, Boundary::Open).unwrap();
        let h = op.matrix().as_matrix();
        for a in 0..9usize {
            for b in 0..9usize {
                let (na, ma) = (a % 3, a / 3);
                let (nb, mb) = (b % 3, b / 3);
                let adjacent = na.abs_diff(nb) + ma.abs_diff(mb) == 1;
                let want = if adjacent { Complex64::ONE } else { Complex64::ZERO };
                assert!((h[(a, b)] - want).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn two_by_two_plaquette_carries_twice_the_field() {
        for &b in &[0.0, 0.1, 0.37, -0.21, 1.3] {
            let op = symmetric_gauge_box(b, 2, Boundary::Open).unwrap();
            assert_eq!(op.matrix().dim(), 4);
            let f = plaquette_flux(&op).unwrap();
            assert!(circular_gap(f, 2.0 * b) < 1e-12, "B = {b}: {f}");
        }
    }

    #[test]
    fn torus_quantization() {
        assert!(symmetric_gauge_box(0.125, 4, Boundary::MagneticPeriodic).is_ok());
        let err = symmetric_gauge_box(0.1, 4, Boundary::MagneticPeriodic).unwrap_err();
        assert!(matches!(err, Error::TorusFlux { .. }));
    }

    #[test]
    fn torus_plaquettes_all_carry_the_same_flux() {
        for &(b, l) in &[(0.125, 4usize), (1.0 / 6.0, 6), (0.0625, 8), (0.1, 5)] {
            let op = symmetric_gauge_box(b, l, Boundary::MagneticPeriodic).unwrap();
            for m in 0..l {
                for n in 0..l {
                    let f = op.plaquette_flux_at(n, m).unwrap();
                    assert!(circular_gap(f, 2.0 * b) < 1e-10, "B={b} L={l} ({n},{m}) -> {f}");
                }
            }
        }
    }

    #[test]
    fn open_box_has_no_wrap_plaquettes() {
        let op = symmetric_gauge_box(0.1, 4, Boundary::Open).unwrap();
        assert!(op.plaquette_flux_at(3, 0).is_err());
    }

    #[test]
    fn onsite_field_shapes() {
        let op = symmetric_gauge_box(0.1, 3, Boundary::Open).unwrap();
        assert!(matches!(add_onsite_disorder(&op, &[0.0; 8]), Err(Error::DimensionMismatch { .. })));
        let same = add_onsite_disorder(&op, &[0.0; 9]).unwrap();
        assert_eq!(same.matrix(), op.matrix());
        let shifted = add_onsite_disorder(&op, &[0.7; 9]).unwrap();
        let a = op.eigenvalues().unwrap();
        let b = shifted.eigenvalues().unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((y - x - 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn banded_order_is_a_permutation() {
        for l in 2..7 {
            let op = symmetric_gauge_box(0.0, l, Boundary::Open).unwrap();
            let mut order = op.banded_order();
            order.sort_unstable();
            assert_eq!(order, (0..l * l).collect::<Vec<_>>());
        }
    }
}
