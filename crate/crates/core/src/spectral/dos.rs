//! Gaussian-smoothed densities of states.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::error::{Error, Result};

/// Uniformly binned density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub densities: Vec<f64>,
    pub normalized: bool,
    /// Fraction of the kernel mass that fell inside `[lo, hi]` before normalization.
    pub coverage: f64,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.densities.len()
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins() as f64
    }

    pub fn edges(&self) -> Vec<f64> {
        let w = self.width();
        (0..=self.bins()).map(|i| self.lo + i as f64 * w).collect()
    }

    pub fn centers(&self) -> Vec<f64> {
        let w = self.width();
        (0..self.bins()).map(|i| self.lo + (i as f64 + 0.5) * w).collect()
    }

    /// `sum density * width`.
    pub fn integral(&self) -> f64 {
        self.densities.iter().sum::<f64>() * self.width()
    }

    /// Mass inside `[a, b]`, with partial bins weighted by overlap.
    pub fn mass_in(&self, a: f64, b: f64) -> f64 {
        let w = self.width();
        self.densities
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let (l, r) = (self.lo + i as f64 * w, self.lo + (i + 1) as f64 * w);
                let overlap = (r.min(b) - l.max(a)).max(0.0);
                d * overlap
            })
            .sum()
    }
}

/// Binning window and resolution for [`dos`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DosParams {
    pub width: f64,
    pub bins: usize,
    /// Fixed `[lo, hi]`; defaults to the data range padded by `5 * width`.
    pub range: Option<(f64, f64)>,
}

impl DosParams {
    pub fn new(width: f64, bins: usize) -> Self {
        DosParams { width, bins, range: None }
    }

    pub fn with_range(mut self, lo: f64, hi: f64) -> Self {
        self.range = Some((lo, hi));
        self
    }
}

/// Normalized density of `values` smoothed with a Gaussian of standard
/// deviation `width`. Each bin receives the exact kernel mass over the bin.
pub fn dos(values: &[f64], params: &DosParams) -> Result<Histogram> {
    let DosParams { width, bins, range } = *params;
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::invalid(format!("smoothing width must be positive, got {width}")));
    }
    if bins == 0 {
        return Err(Error::invalid("bins must be >= 1"));
    }
    if values.is_empty() {
        return Err(Error::EmptySet("eigenvalues"));
    }
    let (lo, hi) = match range {
        Some((lo, hi)) if hi > lo => (lo, hi),
        Some(_) => return Err(Error::invalid("dos range must satisfy lo < hi")),
        None => {
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (min - 5.0 * width, max + 5.0 * width)
        }
    };
    let bw = (hi - lo) / bins as f64;
    let scale = 1.0 / (width * std::f64::consts::SQRT_2);
    let cdf = |x: f64| 0.5 * (1.0 + erf(x * scale));
    let mut mass = vec![0.0; bins];
    for &e in values {
        // Only bins within 8 sigma get a contribution.
        let first = (((e - 8.0 * width - lo) / bw).floor().max(0.0) as usize).min(bins);
        let last = (((e + 8.0 * width - lo) / bw).ceil().max(0.0) as usize).min(bins);
        let mut prev = cdf(lo + first as f64 * bw - e);
        for (i, m) in mass.iter_mut().enumerate().take(last).skip(first) {
            let next = cdf(lo + (i + 1) as f64 * bw - e);
            *m += next - prev;
            prev = next;
        }
    }
    let captured: f64 = mass.iter().sum();
    let coverage = captured / values.len() as f64;
    if captured <= 0.0 {
        return Err(Error::invalid("no spectral weight inside the dos range"));
    }
    let densities = mass.iter().map(|m| m / (captured * bw)).collect();
    Ok(Histogram { lo, hi, densities, normalized: true, coverage })
}
