//! Chern numbers by the lattice field-strength (link variable) method over
//! the fundamental zone of a fiber family.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::eigen::{eigenvalues_hermitian, eigh, Eigh};
use crate::error::{Error, Result};
use crate::lattice::fiber::BlochFiberFamily;
use crate::lattice::matrix::CMatrix;

/// Maximum `|raw - round(raw)|` accepted as an integer.
pub const CHERN_INTEGER_TOL: f64 = 0.01;

// Gaps below this are reported as crossings without further refinement.
const CROSSING_GAP: f64 = 1e-8;
const MAX_REFINE_DEPTH: u32 = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChernReport {
    pub chern: Vec<i64>,
    pub raw: Vec<f64>,
    /// Smallest gap between consecutive bands seen on the grid.
    pub min_gap: f64,
}

impl ChernReport {
    pub fn max_deviation(&self) -> f64 {
        self.raw.iter().zip(&self.chern).map(|(r, c)| (r - *c as f64).abs()).fold(0.0, f64::max)
    }
}

/// Chern number of every band on an `n x n` grid over the family's zone.
///
/// Bands must be separated everywhere in the zone, not only at grid points.
/// Each grid cell is certified with the family's slope bound, refining cells
/// where the bound is inconclusive; a crossing is an error naming the point.
pub fn chern_numbers(family: &BlochFiberFamily, n: usize) -> Result<ChernReport> {
    if n < 2 {
        return Err(Error::invalid("chern grid must be at least 2 x 2"));
    }
    let q = family.dim();
    let zone = family.zone();
    let h = [zone.extent[0] / n as f64, zone.extent[1] / n as f64];
    let point = |i: usize, j: usize| [i as f64 * h[0], j as f64 * h[1]];

    let eig: Vec<Eigh> = (0..n * n).into_par_iter().map(|idx| eigh(&family.at(point(idx / n, idx % n)))).collect();

    let min_gap = certify_gaps(family, &eig, n, h)?;

    let twist = |axis: usize, v: CMatrix| -> CMatrix {
        match &zone.twist[axis] {
            Some(g) => g * v,
            None => v,
        }
    };
    // Eigenvector matrix at the extended grid point (i, j), 0 <= i, j <= n.
    let vectors = |i: usize, j: usize| -> CMatrix {
        let mut v = eig[(i % n) * n + (j % n)].vectors.clone();
        if i == n {
            v = twist(0, v);
        }
        if j == n {
            v = twist(1, v);
        }
        v
    };
    let link = |a: &CMatrix, b: &CMatrix, band: usize| -> Complex64 {
        let z = a.column(band).dotc(&b.column(band));
        z / z.norm()
    };

    let raw: Vec<f64> = (0..q)
        .map(|band| {
            let flux: f64 = (0..n * n)
                .into_par_iter()
                .map(|idx| {
                    let (i, j) = (idx / n, idx % n);
                    let (v00, v10, v11, v01) = (vectors(i, j), vectors(i + 1, j), vectors(i + 1, j + 1), vectors(i, j + 1));
                    let loop_product = link(&v00, &v10, band)
                        * link(&v10, &v11, band)
                        * link(&v11, &v01, band)
                        * link(&v01, &v00, band);
                    loop_product.arg()
                })
                .collect::<Vec<_>>()
                .iter()
                .sum();
            flux / (2.0 * std::f64::consts::PI)
        })
        .collect();

    let mut chern = Vec::with_capacity(q);
    for (band, &r) in raw.iter().enumerate() {
        if (r - r.round()).abs() >= CHERN_INTEGER_TOL {
            return Err(Error::NonIntegerChern { band, raw: r });
        }
        chern.push(r.round() as i64);
    }
    Ok(ChernReport { chern, raw, min_gap })
}

/// Verifies that all consecutive bands stay apart on every grid cell and
/// returns the smallest gap seen at a sample point.
fn certify_gaps(family: &BlochFiberFamily, eig: &[Eigh], n: usize, h: [f64; 2]) -> Result<f64> {
    let q = family.dim();
    if q < 2 {
        return Ok(f64::INFINITY);
    }
    let slope = family.slope_bound();
    let gaps_of = |values: &[f64]| -> Vec<f64> { values.windows(2).map(|w| w[1] - w[0]).collect() };
    let grid_gaps: Vec<Vec<f64>> = eig.iter().map(|e| gaps_of(&e.values)).collect();
    let mut min_gap = f64::INFINITY;
    for (idx, g) in grid_gaps.iter().enumerate() {
        for (b, &gap) in g.iter().enumerate() {
            min_gap = min_gap.min(gap);
            if gap < CROSSING_GAP {
                let k = [(idx / n) as f64 * h[0], (idx % n) as f64 * h[1]];
                return Err(Error::BandCrossing { lower: b, upper: b + 1, k1: k[0], k2: k[1], gap });
            }
        }
    }
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let failures: Vec<Error> = cells
        .par_iter()
        .filter_map(|&(i, j)| {
            // Corner gaps; wrap corners reuse the base point since twists are unitary.
            let corners = [(i, j), ((i + 1) % n, j), (i, (j + 1) % n), ((i + 1) % n, (j + 1) % n)];
            let corner_gaps: Vec<&Vec<f64>> = corners.iter().map(|&(a, b)| &grid_gaps[a * n + b]).collect();
            let origin = [i as f64 * h[0], j as f64 * h[1]];
            certify_cell(family, origin, h, slope, &corner_gaps, 0).err()
        })
        .collect();
    match failures.into_iter().next() {
        Some(e) => Err(e),
        None => Ok(min_gap),
    }
}

fn certify_cell(
    family: &BlochFiberFamily,
    origin: [f64; 2],
    h: [f64; 2],
    slope: [f64; 2],
    corner_gaps: &[&Vec<f64>],
    depth: u32,
) -> Result<()> {
    let drift = slope[0] * h[0] + slope[1] * h[1];
    let q1 = corner_gaps[0].len();
    let uncertified: Vec<usize> = (0..q1)
        .filter(|&b| corner_gaps.iter().map(|g| g[b]).fold(f64::INFINITY, f64::min) <= drift)
        .collect();
    if uncertified.is_empty() {
        return Ok(());
    }
    let half = [h[0] / 2.0, h[1] / 2.0];
    if depth >= MAX_REFINE_DEPTH {
        let b = uncertified[0];
        return Err(Error::BandCrossing {
            lower: b,
            upper: b + 1,
            k1: origin[0] + half[0],
            k2: origin[1] + half[1],
            gap: corner_gaps.iter().map(|g| g[b]).fold(f64::INFINITY, f64::min),
        });
    }
    // 3 x 3 sub-lattice of points; reuse the four known corners.
    let mut sub: [[Vec<f64>; 3]; 3] = Default::default();
    for (a, row) in sub.iter_mut().enumerate() {
        for (c, slot) in row.iter_mut().enumerate() {
            *slot = match (a, c) {
                (0, 0) => corner_gaps[0].clone(),
                (2, 0) => corner_gaps[1].clone(),
                (0, 2) => corner_gaps[2].clone(),
                (2, 2) => corner_gaps[3].clone(),
                _ => {
                    let k = [origin[0] + a as f64 * half[0], origin[1] + c as f64 * half[1]];
                    let values = eigenvalues_hermitian(&family.at(k))?;
                    let gaps: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
                    if let Some((b, &gap)) = gaps.iter().enumerate().find(|(_, &g)| g < CROSSING_GAP) {
                        return Err(Error::BandCrossing { lower: b, upper: b + 1, k1: k[0], k2: k[1], gap });
                    }
                    gaps
                }
            };
        }
    }
    for a in 0..2 {
        for c in 0..2 {
            let corners = [&sub[a][c], &sub[a + 1][c], &sub[a][c + 1], &sub[a + 1][c + 1]];
            let o = [origin[0] + a as f64 * half[0], origin[1] + c as f64 * half[1]];
            certify_cell(family, o, half, slope, &corners, depth + 1)?;
        }
    }
    Ok(())
}

/// Chern numbers predicted by the Diophantine relation `p t_r = r mod q`,
/// `|t_r| <= q/2`, band `r` carrying `t_r - t_{r-1}`. Defined for odd `q`
/// (even `q` has touching central bands).
pub fn diophantine_chern(p: i64, q: i64) -> Option<Vec<i64>> {
    if q < 1 || q % 2 == 0 && q > 1 {
        return None;
    }
    let t = |r: i64| -> i64 {
        if r % q == 0 {
            return 0;
        }
        (-q / 2..=q / 2).find(|&t| (p * t - r).rem_euclid(q) == 0).expect("p is invertible mod q")
    };
    Some((1..=q).map(|r| t(r) - t(r - 1)).collect())
}
