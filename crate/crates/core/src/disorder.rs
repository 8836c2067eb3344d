//! Seeded random potentials and disorder-averaged densities of states.
//!
//! Every draw is a pure function of `(seed, index)`: site `i` reads the first
//! value of ChaCha8 stream `i` under `seed`, so generation order never matters.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landau::FourierPotential;
use crate::spectral::dos::{dos, DosParams, Histogram};
use crate::spectral::sample::BandIntervals;

/// Zero-mean coupling distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CouplingDistribution {
    /// Uniform on `[-W/2, W/2)`.
    Uniform { width: f64 },
    Gaussian { sigma: f64 },
}

impl CouplingDistribution {
    fn validate(&self) -> Result<()> {
        let s = match *self {
            CouplingDistribution::Uniform { width } => width,
            CouplingDistribution::Gaussian { sigma } => sigma,
        };
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::invalid(format!("disorder strength must be finite and >= 0, got {s}")));
        }
        Ok(())
    }

    /// Standard deviation of one coupling.
    pub fn std_dev(&self) -> f64 {
        match *self {
            CouplingDistribution::Uniform { width } => width / 12f64.sqrt(),
            CouplingDistribution::Gaussian { sigma } => sigma,
        }
    }

    fn draw(&self, seed: u64, index: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        match *self {
            CouplingDistribution::Uniform { width } => width * (rng.random::<f64>() - 0.5),
            CouplingDistribution::Gaussian { sigma } => {
                Normal::new(0.0, sigma).expect("validated sigma").sample(&mut rng)
            }
        }
    }
}

/// Shape attached to each coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Profile {
    /// One coupling per lattice site.
    OnSite,
    /// `exp(-|u - gamma|^2 / 2 sigma_b^2)` bumps on the coarse grid.
    Bump { sigma_b: f64 },
}

/// Couplings on a periodic `grid x grid` lattice plus their profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderRealization {
    pub seed: u64,
    pub distribution: CouplingDistribution,
    pub profile: Profile,
    pub grid: usize,
    /// Argument scale: `V(x, y) = w(lambda x, lambda y)`.
    pub scale: f64,
    couplings: Vec<f64>,
}

fn draw_couplings(dist: CouplingDistribution, seed: u64, count: usize) -> Vec<f64> {
    (0..count as u64).into_par_iter().map(|i| dist.draw(seed, i)).collect()
}

/// Independent on-site couplings for an `L x L` box, indexed `m * L + n`.
pub fn anderson_realization(side: usize, dist: CouplingDistribution, seed: u64) -> Result<DisorderRealization> {
    if side == 0 {
        return Err(Error::invalid("box side must be >= 1"));
    }
    dist.validate()?;
    Ok(DisorderRealization {
        seed,
        distribution: dist,
        profile: Profile::OnSite,
        grid: side,
        scale: 1.0,
        couplings: draw_couplings(dist, seed, side * side),
    })
}

/// Smooth field `w(u) = sum_gamma omega_gamma exp(-|u - gamma|^2 / 2 sigma_b^2)`
/// over a periodic `grid x grid` coarse lattice, read at `u = lambda r`.
pub fn scaled_realization(
    seed: u64,
    grid: usize,
    sigma_b: f64,
    lambda: f64,
    dist: CouplingDistribution,
) -> Result<DisorderRealization> {
    if grid == 0 {
        return Err(Error::invalid("coarse grid must be >= 1"));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("scale must be positive, got {lambda}")));
    }
    if !(sigma_b > 0.0 && sigma_b.is_finite()) {
        return Err(Error::invalid(format!("bump width must be positive, got {sigma_b}")));
    }
    dist.validate()?;
    Ok(DisorderRealization {
        seed,
        distribution: dist,
        profile: Profile::Bump { sigma_b },
        grid,
        scale: lambda,
        couplings: draw_couplings(dist, seed, grid * grid),
    })
}

impl DisorderRealization {
    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    fn coupling(&self, i: i64, j: i64) -> f64 {
        let g = self.grid as i64;
        self.couplings[(j.rem_euclid(g) * g + i.rem_euclid(g)) as usize]
    }

    fn bump_reach(sigma_b: f64) -> i64 {
        (8.0 * sigma_b).ceil() as i64 + 1
    }

    /// Unscaled field `w(u)`.
    pub fn coarse_field(&self, u: [f64; 2]) -> f64 {
        match self.profile {
            Profile::OnSite => {
                let (i, j) = (u[0].round(), u[1].round());
                if (u[0] - i).abs() < 1e-9 && (u[1] - j).abs() < 1e-9 {
                    self.coupling(i as i64, j as i64)
                } else {
                    0.0
                }
            }
            Profile::Bump { sigma_b } => {
                let reach = Self::bump_reach(sigma_b);
                let (bx, by) = (u[0].floor() as i64, u[1].floor() as i64);
                let inv = 1.0 / (2.0 * sigma_b * sigma_b);
                let mut acc = 0.0;
                for dj in -reach..=reach {
                    for di in -reach..=reach {
                        let (gx, gy) = (bx + di, by + dj);
                        let r2 = (u[0] - gx as f64).powi(2) + (u[1] - gy as f64).powi(2);
                        acc += self.coupling(gx, gy) * (-r2 * inv).exp();
                    }
                }
                acc
            }
        }
    }

    /// `V(x, y) = w(lambda x, lambda y)`.
    pub fn evaluate(&self, r: [f64; 2]) -> f64 {
        self.coarse_field([self.scale * r[0], self.scale * r[1]])
    }

    /// Upper bound on `|grad w|`: `max |omega|` times the summed bump slopes.
    pub fn lipschitz_bound(&self) -> f64 {
        let Profile::Bump { sigma_b } = self.profile else {
            return f64::INFINITY;
        };
        let max_w = self.couplings.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        let s2 = sigma_b * sigma_b;
        let peak = (-0.5f64).exp() / sigma_b;
        let reach = Self::bump_reach(sigma_b) + 1;
        let mut total = 0.0;
        for dj in -reach..=reach {
            for di in -reach..=reach {
                // Distance from the unit cell [0,1)^2 to the lattice point (di, dj).
                let dx = (di as f64 - 1.0).max(0.0).max(-(di as f64));
                let dy = (dj as f64 - 1.0).max(0.0).max(-(dj as f64));
                let r = (dx * dx + dy * dy).sqrt();
                // sup_{s >= r} (s / sigma^2) exp(-s^2 / 2 sigma^2)
                total += if r <= sigma_b { peak } else { r / s2 * (-r * r / (2.0 * s2)).exp() };
            }
        }
        max_w * total
    }

    /// `V` at the sites of an `L x L` box, indexed `m * L + n`.
    pub fn site_field(&self, side: usize) -> Result<Vec<f64>> {
        match self.profile {
            Profile::OnSite if side != self.grid => Err(Error::DimensionMismatch { expected: self.grid, found: side }),
            Profile::OnSite => Ok(self.couplings.clone()),
            Profile::Bump { .. } => Ok((0..side * side).map(|i| self.evaluate([(i % side) as f64, (i / side) as f64])).collect()),
        }
    }

    /// Fourier series of `V` on a square torus of side `torus_side`, keeping
    /// harmonics `|kx|, |ky| <= cutoff` in units `2 pi / torus_side`. Requires
    /// `lambda * torus_side` to be a multiple of the coarse grid so that `V`
    /// is periodic on the torus.
    pub fn torus_fourier(&self, torus_side: f64, cutoff: usize, cells: usize) -> Result<FourierPotential> {
        let Profile::Bump { .. } = self.profile else {
            return Err(Error::invalid("only smooth realizations have a truncated Fourier series"));
        };
        let wraps = self.scale * torus_side / self.grid as f64;
        if (wraps - wraps.round()).abs() > 1e-9 || wraps.round() < 1.0 {
            return Err(Error::invalid(format!(
                "scaled field is not periodic on the torus: lambda * side / grid = {wraps}"
            )));
        }
        let n = 4 * cutoff + 8;
        let h = torus_side / n as f64;
        let samples: Vec<f64> = (0..n * n).map(|i| self.evaluate([(i % n) as f64 * h, (i / n) as f64 * h])).collect();
        let c = cutoff as i64;
        let mut harmonics = Vec::new();
        for ky in -c..=c {
            for kx in -c..=c {
                let mut acc = Complex64::ZERO;
                for (i, v) in samples.iter().enumerate() {
                    let (a, b) = ((i % n) as f64, (i / n) as f64);
                    acc += Complex64::from_polar(*v, -2.0 * PI * (kx as f64 * a + ky as f64 * b) / n as f64);
                }
                harmonics.push(((kx, ky), acc / (n * n) as f64));
            }
        }
        // Pair each harmonic with its conjugate partner so the series is exactly real.
        let symmetric: Vec<((i64, i64), Complex64)> = harmonics
            .iter()
            .map(|&((kx, ky), z)| {
                let partner = harmonics.iter().find(|(k, _)| *k == (-kx, -ky)).map(|(_, w)| *w).unwrap_or(z.conj());
                ((kx, ky), 0.5 * (z + partner.conj()))
            })
            .collect();
        FourierPotential::with_period(symmetric, cells)
    }
}

/// Disorder-averaged density of states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub realizations: usize,
    pub seeds: Vec<u64>,
    pub mean: Histogram,
    /// Per-bin standard error of the mean, `sd / sqrt(n)`.
    pub std_error: Vec<f64>,
}

/// Averages `dos(build(seed))` over seeds `base_seed + i`, `i < n`. When the
/// histogram range is not fixed it spans all realizations.
pub fn ensemble_dos<F>(build: F, n: usize, base_seed: u64, params: &DosParams) -> Result<EnsembleStats>
where
    F: Fn(u64) -> Result<Vec<f64>> + Sync,
{
    if n == 0 {
        return Err(Error::invalid("ensemble needs at least one realization"));
    }
    let seeds: Vec<u64> = (0..n as u64).map(|i| base_seed.wrapping_add(i)).collect();
    let spectra = seeds.par_iter().map(|&s| build(s)).collect::<Result<Vec<_>>>()?;
    let mut params = *params;
    if params.range.is_none() {
        let lo = spectra.iter().flatten().copied().fold(f64::INFINITY, f64::min);
        let hi = spectra.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
        params.range = Some((lo - 5.0 * params.width, hi + 5.0 * params.width));
    }
    let hists = spectra.par_iter().map(|s| dos(s, &params)).collect::<Result<Vec<_>>>()?;
    let bins = hists[0].bins();
    let nf = n as f64;
    let mut mean = hists[0].clone();
    mean.coverage = hists.iter().map(|h| h.coverage).sum::<f64>() / nf;
    let mut std_error = vec![0.0; bins];
    for b in 0..bins {
        // Offsets from the first realization keep identical inputs exact.
        let x0 = hists[0].densities[b];
        let dm = hists.iter().map(|h| h.densities[b] - x0).sum::<f64>() / nf;
        mean.densities[b] = x0 + dm;
        if n > 1 {
            let var = hists.iter().map(|h| (h.densities[b] - x0 - dm).powi(2)).sum::<f64>() / (nf - 1.0);
            std_error[b] = (var / nf).sqrt();
        }
    }
    Ok(EnsembleStats { realizations: n, seeds, mean, std_error })
}

/// Fraction of the averaged density lying inside the gaps of `clean`.
pub fn gap_fill_fraction(clean: &BandIntervals, disordered: &EnsembleStats) -> Result<f64> {
    let gaps = clean.gaps();
    if gaps.is_empty() {
        return Err(Error::NoGap);
    }
    let h = &disordered.mean;
    let total = h.integral();
    if total <= 0.0 {
        return Err(Error::EmptySet("averaged density"));
    }
    let inside: f64 = gaps.iter().map(|&(a, b)| h.mass_in(a, b)).sum();
    Ok((inside / total).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(w: f64) -> CouplingDistribution {
        CouplingDistribution::Uniform { width: w }
    }

    #[test]
    fn zero_strength_is_zero() {
        let r = anderson_realization(5, uniform(0.0), 1).unwrap();
        assert!(r.couplings().iter().all(|&w| w == 0.0));
        let g = anderson_realization(5, CouplingDistribution::Gaussian { sigma: 0.0 }, 1).unwrap();
        assert!(g.couplings().iter().all(|&w| w == 0.0));
    }

    #[test]
    fn negative_strength_is_rejected() {
        assert!(anderson_realization(5, uniform(-1.0), 1).is_err());
        assert!(scaled_realization(1, 4, 0.5, 1.0, CouplingDistribution::Gaussian { sigma: -0.1 }).is_err());
        assert!(scaled_realization(1, 4, 0.5, 0.0, uniform(1.0)).is_err());
    }

    #[test]
    fn draws_are_reproducible_and_order_free() {
        let a = anderson_realization(20, uniform(2.0), 42).unwrap();
        let b = anderson_realization(20, uniform(2.0), 42).unwrap();
        assert_eq!(a, b);
        let serial: Vec<f64> = (0..400u64).map(|i| uniform(2.0).draw(42, i)).collect();
        assert_eq!(a.couplings(), &serial[..]);
        let c = anderson_realization(20, uniform(2.0), 43).unwrap();
        assert_ne!(a.couplings(), c.couplings());
        assert!(a.couplings().iter().all(|w| w.abs() <= 1.0));
    }

    #[test]
    fn uniform_mean_within_clt_bound() {
        let w = 2.0;
        let r = anderson_realization(1000, uniform(w), 2024).unwrap();
        let mean = r.couplings().iter().sum::<f64>() / 1e6;
        assert!(mean.abs() <= 3.0 * (w / 12f64.sqrt()) / 1e3, "mean {mean}");
    }

    #[test]
    fn smooth_field_is_lipschitz_and_deterministic() {
        for &lambda in &[0.05, 0.2] {
            let r = scaled_realization(9, 8, 0.7, lambda, uniform(1.0)).unwrap();
            let bound = lambda * r.lipschitz_bound();
            for n in 0..20 {
                for m in 0..20 {
                    let p = [n as f64, m as f64];
                    let here = r.evaluate(p);
                    assert_eq!(here, r.evaluate(p));
                    assert!((here - r.evaluate([p[0] + 1.0, p[1]])).abs() <= bound);
                }
            }
        }
    }

    #[test]
    fn coarse_field_is_periodic() {
        let r = scaled_realization(3, 5, 0.8, 1.0, uniform(1.0)).unwrap();
        for &u in &[[0.3, 0.7], [2.2, 4.9]] {
            assert!((r.coarse_field(u) - r.coarse_field([u[0] + 5.0, u[1] - 5.0])).abs() < 1e-12);
        }
    }

    #[test]
    fn onsite_field_matches_couplings() {
        let r = anderson_realization(4, uniform(1.0), 5).unwrap();
        assert_eq!(r.site_field(4).unwrap(), r.couplings());
        assert!(r.site_field(5).is_err());
        assert_eq!(r.evaluate([1.0, 2.0]), r.couplings()[2 * 4 + 1]);
    }

    #[test]
    fn single_realization_ensemble_equals_dos() {
        let build = |seed: u64| -> Result<Vec<f64>> { Ok(anderson_realization(6, uniform(1.0), seed)?.couplings().to_vec()) };
        let params = DosParams::new(0.1, 50).with_range(-1.0, 1.0);
        let stats = ensemble_dos(build, 1, 10, &params).unwrap();
        let single = dos(&build(10).unwrap(), &params).unwrap();
        assert_eq!(stats.mean.densities, single.densities);
        assert!(stats.std_error.iter().all(|&e| e == 0.0));
        assert_eq!(stats.seeds, vec![10]);
    }

    #[test]
    fn identical_realizations_have_zero_error() {
        let build = |_seed: u64| -> Result<Vec<f64>> { Ok(vec![0.0, 1.0, 2.0]) };
        let stats = ensemble_dos(build, 5, 0, &DosParams::new(0.1, 30)).unwrap();
        assert!(stats.std_error.iter().all(|&e| e == 0.0));
        assert_eq!(stats.realizations, 5);
    }

    #[test]
    fn gap_fill_bounds() {
        let clean = BandIntervals::from_intervals(vec![(-1.0, -0.5), (0.5, 1.0)], 0.0).unwrap();
        let inside = EnsembleStats {
            realizations: 1,
            seeds: vec![0],
            mean: dos(&[0.0], &DosParams::new(0.01, 200).with_range(-2.0, 2.0)).unwrap(),
            std_error: vec![0.0; 200],
        };
        let f = gap_fill_fraction(&clean, &inside).unwrap();
        assert!(f > 0.999 && f <= 1.0);
        let single = BandIntervals::single(-1.0, 1.0);
        assert!(matches!(gap_fill_fraction(&single, &inside), Err(Error::NoGap)));
    }

    #[test]
    fn torus_fourier_reconstructs_the_field() {
        // Smooth field, periodic on a torus of side 4 with lambda = 1.
        let r = scaled_realization(11, 4, 0.9, 1.0, uniform(1.0)).unwrap();
        let v = r.torus_fourier(4.0, 6, 4).unwrap();
        v.check_real(1e-12).unwrap();
        for &p in &[[0.0, 0.0], [1.3, 2.7], [3.5, 0.25]] {
            let got = v.evaluate(p, 1.0);
            assert!((got - r.evaluate(p)).abs() < 1e-3, "{got} vs {}", r.evaluate(p));
        }
        assert!(r.torus_fourier(3.0, 4, 3).is_err());
    }
}
