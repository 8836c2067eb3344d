//! Spectra as sets: grid sweeps of fiber families, interval unions and the
//! Hausdorff distance between them.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::eigen::eigenvalues_hermitian;
use crate::error::{Error, Result};
use crate::lattice::fiber::BlochFiberFamily;
use crate::lattice::flux::RationalFlux;

/// Where a sample came from.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub flux: Option<RationalFlux>,
    pub grid: Option<[usize; 2]>,
    pub gauge: String,
}

/// Sorted multiset of eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSample {
    values: Vec<f64>,
    /// Upper estimate of the distance from any point of the sampled bands to
    /// the sample, `0.5 * sum_i slope_i * h_i`. Zero when unknown/exact.
    resolution: f64,
    /// Largest change of any single band between adjacent grid points.
    step_bound: f64,
    pub provenance: Provenance,
}

impl SpectrumSample {
    pub fn new(mut values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("spectrum sample contains non-finite values"));
        }
        values.sort_by(f64::total_cmp);
        Ok(SpectrumSample { values, resolution: 0.0, step_bound: 0.0, provenance })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> Option<f64> {
        self.values.first().copied()
    }

    pub fn max(&self) -> Option<f64> {
        self.values.last().copied()
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn step_bound(&self) -> f64 {
        self.step_bound
    }

    /// Mirror image `E -> -E`.
    pub fn negated(&self) -> Self {
        let mut out = self.clone();
        out.values = self.values.iter().rev().map(|v| -v).collect();
        out
    }

    /// `10 x` the median positive spacing. Exact repeats (|dE| <= 1e-12) are
    /// skipped so symmetry-degenerate samples do not collapse the estimate.
    pub fn median_gap_tol(&self) -> Option<f64> {
        let mut gaps: Vec<f64> = self.values.windows(2).map(|w| w[1] - w[0]).filter(|&g| g > 1e-12).collect();
        if gaps.is_empty() {
            return None;
        }
        let mid = gaps.len() / 2;
        let (_, median, _) = gaps.select_nth_unstable_by(mid, f64::total_cmp);
        Some(10.0 * *median)
    }

    /// Default merge threshold: the larger of the median heuristic and the
    /// largest per-band grid step. Adjacent samples of one band never differ by
    /// more than that step, so a connected band is never split by sampling.
    pub fn default_gap_tol(&self) -> f64 {
        let grid = self.step_bound * (1.0 + 1e-9) + 1e-12;
        self.median_gap_tol().unwrap_or(0.0).max(grid).max(1e-12)
    }
}

/// Eigenvalues of a fiber family at every point of a rectangular grid.
/// Rows are stored in grid order (`i1` major), independent of evaluation order.
#[derive(Debug, Clone)]
pub struct FiberSweep {
    pub origin: [f64; 2],
    pub extent: [f64; 2],
    pub grid: [usize; 2],
    pub dim: usize,
    pub eigenvalues: Vec<Vec<f64>>,
    slope_bound: [f64; 2],
    provenance: Provenance,
}

impl FiberSweep {
    /// Uniform grid `origin + (i1 h1, i2 h2)` with `h = extent / grid`.
    pub fn over(family: &BlochFiberFamily, origin: [f64; 2], extent: [f64; 2], grid: [usize; 2]) -> Result<Self> {
        if grid[0] == 0 || grid[1] == 0 {
            return Err(Error::invalid("grid sizes must be >= 1"));
        }
        let h = [extent[0] / grid[0] as f64, extent[1] / grid[1] as f64];
        let eigenvalues = (0..grid[0] * grid[1])
            .into_par_iter()
            .map(|idx| {
                let (i1, i2) = (idx / grid[1], idx % grid[1]);
                let k = [origin[0] + i1 as f64 * h[0], origin[1] + i2 as f64 * h[1]];
                eigenvalues_hermitian(&family.at(k))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FiberSweep {
            origin,
            extent,
            grid,
            dim: family.dim(),
            eigenvalues,
            slope_bound: family.slope_bound(),
            provenance: Provenance {
                flux: Some(family.flux()),
                grid: Some(grid),
                gauge: family.gauge().to_string(),
            },
        })
    }

    /// Full `[0, 2 pi)^2` sweep.
    pub fn full_zone(family: &BlochFiberFamily, grid: [usize; 2]) -> Result<Self> {
        FiberSweep::over(family, [0.0, 0.0], [2.0 * PI, 2.0 * PI], grid)
    }

    pub fn spacing(&self) -> [f64; 2] {
        [self.extent[0] / self.grid[0] as f64, self.extent[1] / self.grid[1] as f64]
    }

    pub fn sample(&self) -> SpectrumSample {
        let h = self.spacing();
        let values: Vec<f64> = self.eigenvalues.iter().flatten().copied().collect();
        let mut s = SpectrumSample::new(values, self.provenance.clone()).expect("eigenvalues are finite");
        s.resolution = 0.5 * (self.slope_bound[0] * h[0] + self.slope_bound[1] * h[1]);
        s.step_bound = self.max_band_step();
        s
    }

    /// Largest `|E_b(k) - E_b(k')|` over bands `b` and grid neighbours `k, k'`.
    pub fn max_band_step(&self) -> f64 {
        let [n1, n2] = self.grid;
        let at = |i: usize, j: usize| &self.eigenvalues[i * n2 + j];
        let step = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let mut worst = 0.0f64;
        for i in 0..n1 {
            for j in 0..n2 {
                if i + 1 < n1 {
                    worst = worst.max(step(at(i, j), at(i + 1, j)));
                }
                if j + 1 < n2 {
                    worst = worst.max(step(at(i, j), at(i, j + 1)));
                }
            }
        }
        worst
    }

    /// `(min, max)` of the `b`-th eigenvalue over the grid.
    pub fn band_range(&self, band: usize) -> (f64, f64) {
        self.eigenvalues.iter().map(|ev| ev[band]).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| (lo.min(e), hi.max(e)))
    }

    /// Values of band `b` across the grid, sorted.
    pub fn band_values(&self, band: usize) -> Vec<f64> {
        let mut v: Vec<f64> = self.eigenvalues.iter().map(|ev| ev[band]).collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

/// Concatenated eigenvalues over the uniform `n1 x n2` grid on `[0, 2 pi)^2`.
pub fn spectrum_union(family: &BlochFiberFamily, n1: usize, n2: usize) -> Result<SpectrumSample> {
    Ok(FiberSweep::full_zone(family, [n1, n2])?.sample())
}

/// Disjoint closed intervals `[a_i, b_i]` with `a_{i+1} > b_i + threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandIntervals {
    intervals: Vec<(f64, f64)>,
    threshold: f64,
}

impl BandIntervals {
    /// Normalises arbitrary intervals: sorts and merges any that come within `threshold`.
    pub fn from_intervals(mut raw: Vec<(f64, f64)>, threshold: f64) -> Result<Self> {
        if raw.iter().any(|&(a, b)| !(a.is_finite() && b.is_finite()) || b < a) {
            return Err(Error::invalid("intervals must be finite with lower <= upper"));
        }
        raw.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (a, b) in raw {
            match out.last_mut() {
                Some(last) if a <= last.1 + threshold => last.1 = last.1.max(b),
                _ => out.push((a, b)),
            }
        }
        Ok(BandIntervals { intervals: out, threshold })
    }

    pub fn single(a: f64, b: f64) -> Self {
        BandIntervals { intervals: vec![(a.min(b), a.max(b))], threshold: 0.0 }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Open gaps `(b_i, a_{i+1})` between consecutive intervals.
    pub fn gaps(&self) -> Vec<(f64, f64)> {
        self.intervals.windows(2).map(|w| (w[0].1, w[1].0)).collect()
    }

    pub fn distance_to(&self, x: f64) -> f64 {
        let i = self.intervals.partition_point(|&(_, b)| b < x);
        let mut d = f64::INFINITY;
        if let Some(&(a, b)) = self.intervals.get(i) {
            d = d.min(if x < a { a - x } else if x > b { x - b } else { 0.0 });
        }
        if i > 0 {
            d = d.min(x - self.intervals[i - 1].1);
        }
        d
    }

    pub fn contains(&self, x: f64) -> bool {
        self.distance_to(x) == 0.0
    }

    pub fn negated(&self) -> Self {
        BandIntervals {
            intervals: self.intervals.iter().rev().map(|&(a, b)| (-b, -a)).collect(),
            threshold: self.threshold,
        }
    }

    /// `sup_{x in self} d(x, other)`; exact for interval unions.
    pub fn directed_distance(&self, other: &BandIntervals) -> f64 {
        let mut worst = 0.0f64;
        for &(a, b) in &self.intervals {
            worst = worst.max(other.distance_to(a)).max(other.distance_to(b));
            // Inside [a, b] the distance to `other` peaks at gap midpoints.
            for (g0, g1) in other.gaps() {
                let mid = 0.5 * (g0 + g1);
                if mid > a && mid < b {
                    worst = worst.max(other.distance_to(mid));
                }
            }
        }
        worst
    }
}

/// Merges consecutive sample values closer than `gap_tol` into maximal intervals.
pub fn band_intervals(s: &SpectrumSample, gap_tol: f64) -> Result<BandIntervals> {
    if s.is_empty() {
        return Err(Error::EmptySet("spectrum sample"));
    }
    if !(gap_tol > 0.0) {
        return Err(Error::invalid(format!("gap_tol must be positive, got {gap_tol}")));
    }
    let v = s.values();
    let mut out = Vec::new();
    let mut start = v[0];
    for w in v.windows(2) {
        if w[1] - w[0] >= gap_tol {
            out.push((start, w[0]));
            start = w[1];
        }
    }
    out.push((start, *v.last().expect("non-empty")));
    Ok(BandIntervals { intervals: out, threshold: gap_tol })
}

/// Symmetric Hausdorff distance between two interval unions.
pub fn hausdorff(a: &BandIntervals, b: &BandIntervals) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet("hausdorff operand"));
    }
    Ok(a.directed_distance(b).max(b.directed_distance(a)))
}
