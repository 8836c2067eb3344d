//! One function per subcommand, each producing a table, a summary and checks.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::time::Instant;

use magspec_core::disorder::{anderson_realization, ensemble_dos, gap_fill_fraction, scaled_realization, CouplingDistribution};
use magspec_core::dynamics::defect_row;
use magspec_core::landau::{
    continuum_hamiltonian, landau_torus_basis_with, snap_field, strong_field_row, CellGeometry, FourierPotential,
    LandauBasisSpec, MIN_GAP_FRACTION,
};
use magspec_core::lattice::{
    add_onsite_disorder, harper_family, hofstadter_family, hofstadter_fiber, peierls_quantize, symmetric_gauge_box,
    Boundary, FourierDispersion,
};
use magspec_core::spectral::chern::CHERN_INTEGER_TOL;
use magspec_core::spectral::eigen::eigenvalues_hermitian;
use magspec_core::spectral::{band_intervals, chern_numbers, hausdorff, spectrum_union, DosParams, FiberSweep};
use magspec_core::{BandIntervals, RationalFlux};
use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::artifact::{Check, RunArtifact, Table};
use crate::config::*;
use crate::error::{CliError, CliResult};

struct Output {
    table: Table,
    summary: Map<String, Value>,
    checks: Vec<Check>,
}

impl Output {
    fn new(table: Table) -> Self {
        Output { table, summary: Map::new(), checks: Vec::new() }
    }

    fn note(&mut self, key: &str, v: Value) {
        self.summary.insert(key.to_string(), v);
    }
}

/// Runs the configured command. Failed checks are reported in the artifact,
/// not as errors; see [`RunArtifact::verdict`].
pub fn run(cfg: &RunConfig) -> CliResult<RunArtifact> {
    let start = Instant::now();
    let out = match &cfg.params {
        CommandParams::Butterfly(p) => butterfly(p)?,
        CommandParams::FiberSpectrum(p) => fiber_spectrum(p)?,
        CommandParams::HarperSpectrum(p) => harper_spectrum(p)?,
        CommandParams::PeierlsCheck(p) => peierls_check(p)?,
        CommandParams::GaugeCheck(p) => gauge_check(p)?,
        CommandParams::Chern(p) => chern(p)?,
        CommandParams::ContinuumSpectrum(p) => continuum_spectrum(p)?,
        CommandParams::LllCompare(p) => lll_compare(p)?,
        CommandParams::DynamicsDefect(p) => dynamics_defect(p)?,
        CommandParams::DisorderDos(p) => disorder_dos(p)?,
    };
    Ok(RunArtifact {
        config: cfg.clone(),
        table: out.table,
        summary: out.summary,
        checks: out.checks,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (i, frac) = (pos.floor() as usize, pos.fract());
    match sorted.get(i + 1) {
        Some(next) => sorted[i] + frac * (next - sorted[i]),
        None => sorted[i],
    }
}

fn sci(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.4e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn points(values: &[f64]) -> CliResult<BandIntervals> {
    Ok(BandIntervals::from_intervals(values.iter().map(|&x| (x, x)).collect(), 0.0)?)
}

fn butterfly(p: &ButterflyParams) -> CliResult<Output> {
    let mut table = Table::new(&["p", "q", "band", "e_min", "e_max", "e_q25", "e_q50", "e_q75"]);
    let mut ranges = HashMap::new();
    for f in RationalFlux::farey_up_to(p.q_max) {
        let sweep = FiberSweep::full_zone(&hofstadter_family(f), [p.kgrid, p.kgrid])?;
        for band in 0..f.dim() {
            let mut v = sweep.band_values(band);
            v.sort_by(f64::total_cmp);
            let (lo, hi) = (v[0], v[v.len() - 1]);
            ranges.insert((f.p(), f.q(), band as i64), (lo, hi));
            table.push(vec![
                f.p().into(),
                f.q().into(),
                band.into(),
                lo.into(),
                hi.into(),
                quantile(&v, 0.25).into(),
                quantile(&v, 0.5).into(),
                quantile(&v, 0.75).into(),
            ]);
        }
    }
    let (mut mirror, mut reflect) = (0.0f64, 0.0f64);
    for (&(pp, q, band), &(lo, hi)) in &ranges {
        let (mlo, mhi) = ranges[&(pp, q, q - 1 - band)];
        mirror = mirror.max((lo + mhi).abs()).max((hi + mlo).abs());
        let (rlo, rhi) = ranges[&(q - pp, q, band)];
        reflect = reflect.max((lo - rlo).abs()).max((hi - rhi).abs());
    }
    let mut out = Output::new(table);
    out.note("fluxes", json!(RationalFlux::farey_up_to(p.q_max).len()));
    out.note("energy_symmetry_defect", json!(mirror));
    out.note("flux_symmetry_defect", json!(reflect));
    out.checks.push(Check::below("energy_symmetry", mirror, p.symmetry_tol));
    out.checks.push(Check::below("flux_symmetry", reflect, p.symmetry_tol));
    Ok(out)
}

fn interval_table(bands: &BandIntervals) -> Table {
    let mut table = Table::new(&["band", "lo", "hi"]);
    for (i, &(lo, hi)) in bands.intervals().iter().enumerate() {
        table.push(vec![i.into(), lo.into(), hi.into()]);
    }
    table
}

fn fiber_spectrum(p: &FiberSpectrumParams) -> CliResult<Output> {
    let sweep = FiberSweep::full_zone(&hofstadter_family(p.flux), [p.kgrid, p.kgrid])?;
    let sample = sweep.sample();
    let tol = p.gap_tol.unwrap_or_else(|| sample.default_gap_tol());
    let bands = band_intervals(&sample, tol)?;
    // Smallest direct gap between consecutive fiber bands over the grid.
    let direct: Vec<f64> = (1..sweep.dim)
        .map(|j| sweep.eigenvalues.iter().map(|ev| ev[j] - ev[j - 1]).fold(f64::INFINITY, f64::min))
        .collect();
    let mut out = Output::new(interval_table(&bands));
    out.note("gap_tol", json!(tol));
    out.note("samples", json!(sample.len()));
    out.note("resolution", json!(sample.resolution()));
    out.note("min_direct_gaps", json!(direct));
    Ok(out)
}

fn harper_spectrum(p: &HarperSpectrumParams) -> CliResult<Output> {
    let zone = 2.0 * PI / p.flux.q() as f64;
    let harper = FiberSweep::over(&harper_family(p.flux), [0.0, 0.0], [zone, zone], [p.kgrid, p.kgrid])?.sample();
    let lattice = spectrum_union(&hofstadter_family(p.flux), p.kgrid, p.kgrid)?;
    let hb = band_intervals(&harper, p.gap_tol.unwrap_or_else(|| harper.default_gap_tol()))?;
    let lb = band_intervals(&lattice, p.gap_tol.unwrap_or_else(|| lattice.default_gap_tol()))?;
    let d = hausdorff(&hb, &lb)?;
    let mut out = Output::new(interval_table(&hb));
    out.note("hausdorff_to_lattice", json!(d));
    out.checks.push(Check::below("harper_duality", d, p.tolerance));
    Ok(out)
}

fn peierls_check(p: &PeierlsCheckParams) -> CliResult<Output> {
    let mut table = Table::new(&["flux", "points", "max_abs_diff"]);
    let mut worst = 0.0f64;
    let disp = FourierDispersion::square_lattice();
    let h = 2.0 * PI / p.kgrid as f64;
    for &f in &p.flux {
        let fam = peierls_quantize(&disp, f)?;
        let mut max_diff = 0.0f64;
        for i in 0..p.kgrid {
            for j in 0..p.kgrid {
                let k = [i as f64 * h, j as f64 * h];
                let a = eigenvalues_hermitian(&fam.at(k))?;
                let b = eigenvalues_hermitian(&hofstadter_fiber(f, k)?)?;
                max_diff = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(max_diff, f64::max);
            }
        }
        worst = worst.max(max_diff);
        table.push(vec![f.to_string().into(), (p.kgrid * p.kgrid).into(), max_diff.into()]);
    }
    let mut out = Output::new(table);
    out.checks.push(Check::below("peierls_identity", worst, p.tolerance));
    Ok(out)
}

fn gauge_check(p: &GaugeCheckParams) -> CliResult<Output> {
    let op = symmetric_gauge_box(p.field, p.side, Boundary::MagneticPeriodic)?;
    let flux = RationalFlux::approximate(2.0 * p.field, (p.side * p.side) as i64)?;
    let box_ev = op.eigenvalues()?;
    let fam = hofstadter_family(flux);
    // Fibers at the momenta compatible with the torus.
    let matched = spectrum_union(&fam, p.side, p.side)?;
    let d = hausdorff(&points(&box_ev)?, &points(matched.values())?)?;
    let mut repeated: Vec<f64> = box_ev.iter().flat_map(|&e| std::iter::repeat_n(e, flux.dim())).collect();
    repeated.sort_by(f64::total_cmp);
    let multiset = if repeated.len() == matched.len() {
        repeated.iter().zip(matched.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let full = spectrum_union(&fam, p.kgrid, p.kgrid)?;
    let tol = p.gap_tol.unwrap_or_else(|| full.default_gap_tol());
    let band_distance = hausdorff(&band_intervals(&full, tol)?, &points(&box_ev)?)?;

    let mut table = Table::new(&["field", "side", "flux", "hausdorff", "multiset_deviation", "band_distance"]);
    table.push(vec![
        p.field.into(),
        p.side.into(),
        flux.to_string().into(),
        d.into(),
        multiset.into(),
        band_distance.into(),
    ]);
    let mut out = Output::new(table);
    out.note("plaquette_flux", json!(flux.to_string()));
    out.checks.push(Check::below("gauge_equivalence", d, p.tolerance));
    Ok(out)
}

fn chern(p: &ChernParams) -> CliResult<Output> {
    let report = chern_numbers(&hofstadter_family(p.flux), p.kgrid)?;
    let mut table = Table::new(&["band", "chern", "raw"]);
    for (i, (c, r)) in report.chern.iter().zip(&report.raw).enumerate() {
        table.push(vec![i.into(), (*c).into(), (*r).into()]);
    }
    let sum: i64 = report.chern.iter().sum();
    let mut out = Output::new(table);
    out.note("sum", json!(sum));
    out.note("max_deviation", json!(report.max_deviation()));
    out.note("min_gap", json!(report.min_gap));
    out.checks.push(Check::numerical("band_sum", sum == 0, format!("sum = {sum}")));
    out.checks.push(Check::below("integrality", report.max_deviation(), CHERN_INTEGER_TOL));
    Ok(out)
}

fn continuum_basis(target: f64, cells: usize, n_ll: usize, snap: bool) -> CliResult<LandauBasisSpec> {
    let geometry = CellGeometry::Unit;
    let (field, n_phi) = if snap {
        snap_field(target, cells, geometry)?
    } else {
        let side = cells as f64 * geometry.side();
        (target, ((target * side * side / PI).round() as usize).max(1))
    };
    Ok(landau_torus_basis_with(field, n_phi, n_ll, geometry)?)
}

fn potential(spec: &PotentialSpec, basis: &LandauBasisSpec, seed: u64) -> CliResult<FourierPotential> {
    let v = match spec {
        PotentialSpec::CosineSquare { amplitude } => FourierPotential::cosine_square(*amplitude),
        PotentialSpec::Harmonics { terms } => {
            let v = FourierPotential::new(
                terms.iter().map(|t| ((t[0] as i64, t[1] as i64), Complex64::new(t[2], t[3]))),
            )?;
            v.check_real(1e-12)?;
            v
        }
        PotentialSpec::Disorder { width, sigma_b, grid, lambda, cutoff } => {
            let dist = CouplingDistribution::Uniform { width: *width };
            let r = scaled_realization(seed, *grid, *sigma_b, lambda.unwrap_or(basis.field), dist)?;
            r.torus_fourier(basis.torus_side(), *cutoff, basis.cells)?
        }
    };
    Ok(v)
}

fn basis_summary(out: &mut Output, bases: &[LandauBasisSpec]) {
    out.note("fields", json!(bases.iter().map(|b| b.field).collect::<Vec<_>>()));
    out.note("n_phi", json!(bases.iter().map(|b| b.n_phi).collect::<Vec<_>>()));
}

fn continuum_spectrum(p: &ContinuumParams) -> CliResult<Output> {
    let basis = continuum_basis(p.field, p.cells, p.n_ll, p.snap)?;
    let v = potential(&p.potential, &basis, p.seed)?;
    let ev = continuum_hamiltonian(&basis, &v)?.eigenvalues()?;
    let mut table = Table::new(&["index", "energy"]);
    for (i, e) in ev.iter().enumerate() {
        table.push(vec![i.into(), (*e).into()]);
    }
    let mut out = Output::new(table);
    basis_summary(&mut out, std::slice::from_ref(&basis));
    out.note("dim", json!(basis.dim()));
    if p.potential.is_zero() {
        let dev = ev
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let level = basis.level_energy(i / basis.n_phi);
                (e - level).abs() / level
            })
            .fold(0.0, f64::max);
        out.note("landau_level_deviation", json!(dev));
        out.checks.push(Check::below("landau_levels", dev, p.tolerance));
    }
    Ok(out)
}

fn separation_check(rows: &[(f64, f64, bool)]) -> Check {
    let bad: Vec<String> =
        rows.iter().filter(|r| !r.2).map(|(b, gap, _)| format!("B = {b:.4}: gap {gap:.3e}")).collect();
    let detail = if bad.is_empty() {
        format!("every lowest cluster is separated by >= {MIN_GAP_FRACTION} x 2b")
    } else {
        bad.join("; ")
    };
    Check::feasibility("cluster_separation", bad.is_empty(), detail)
}

fn lll_compare(p: &LllCompareParams) -> CliResult<Output> {
    let mut table =
        Table::new(&["field", "n_phi", "distance", "cluster_gap", "cluster_width", "next_level_coupling", "separated"]);
    let mut bases = Vec::new();
    let mut rows = Vec::new();
    for &target in &p.field {
        let basis = continuum_basis(target, p.cells, p.n_ll, p.snap)?;
        let v = potential(&p.potential, &basis, p.seed)?;
        let r = strong_field_row(&basis, &v, MIN_GAP_FRACTION)?;
        table.push(vec![
            r.field.into(),
            r.n_phi.into(),
            r.distance.into(),
            r.cluster_gap.into(),
            r.cluster_width.into(),
            r.next_level_coupling.into(),
            r.separated.into(),
        ]);
        rows.push((r.field, r.cluster_gap, r.separated));
        bases.push(basis);
    }
    let mut out = Output::new(table);
    basis_summary(&mut out, &bases);
    let d = out.table.values("distance");
    let decreasing = d.windows(2).all(|w| w[0] > w[1]);
    out.checks.push(Check::numerical("strictly_decreasing", decreasing, format!("distances {}", sci(&d))));
    out.checks.push(separation_check(&rows));
    Ok(out)
}

fn dynamics_defect(p: &DynamicsDefectParams) -> CliResult<Output> {
    let times = p.times();
    let mut table = Table::new(&["field", "n_phi", "t", "defect", "slope"]);
    let (mut slopes, mut d0, mut dmax, mut rows, mut bases) = (Vec::new(), 0.0f64, 0.0f64, Vec::new(), Vec::new());
    for &target in &p.field {
        let basis = continuum_basis(target, p.cells, p.n_ll, p.snap)?;
        let v = potential(&p.potential, &basis, p.seed)?;
        let r = defect_row(&basis, &v, &times)?;
        for (t, d) in r.times.iter().zip(&r.defects) {
            table.push(vec![r.field.into(), r.n_phi.into(), (*t).into(), (*d).into(), r.slope.into()]);
            if *t == 0.0 {
                d0 = d0.max(*d);
            }
            dmax = dmax.max(*d);
        }
        slopes.push(r.slope);
        rows.push((r.field, r.cluster_gap, r.separated));
        bases.push(basis);
    }
    let mut out = Output::new(table);
    basis_summary(&mut out, &bases);
    out.note("slopes", json!(slopes));
    let monotone = slopes.windows(2).all(|w| w[0] > w[1]);
    out.checks.push(Check::below("initial_defect", d0, p.tolerance));
    out.checks.push(Check::below("bounded", dmax, 2.0));
    out.checks.push(Check::numerical("slopes_decreasing", monotone, format!("slopes {}", sci(&slopes))));
    out.checks.push(separation_check(&rows));
    Ok(out)
}

fn disorder_dos(p: &DisorderDosParams) -> CliResult<Output> {
    let field = p.flux.value() / 2.0;
    let clean_box = symmetric_gauge_box(field, p.side, Boundary::MagneticPeriodic)?;
    let clean = band_intervals(&spectrum_union(&hofstadter_family(p.flux), p.kgrid, p.kgrid)?, p.gap_tol)?;
    let dos_params = DosParams::new(p.dos_width, p.bins).with_range(p.range[0], p.range[1]);
    let lambda = p.lambda.unwrap_or(if p.inverse_scale { 1.0 / field } else { field });
    let coarse = lambda * p.side as f64;
    if p.profile == ProfileKind::Bump && ((coarse - coarse.round()).abs() > 1e-9 || coarse.round() < 1.0) {
        return Err(CliError::config(format!(
            "bump profile needs lambda * side to be a positive integer, got {coarse}"
        )));
    }

    let mut table = Table::new(&["width", "gap_fill", "max_std_error", "coverage"]);
    for &w in &p.widths {
        let dist = p.distribution.with_strength(w);
        let build = |seed: u64| {
            let site = match p.profile {
                ProfileKind::Onsite => anderson_realization(p.side, dist, seed)?.site_field(p.side)?,
                ProfileKind::Bump => {
                    scaled_realization(seed, coarse.round() as usize, p.sigma_b, lambda, dist)?.site_field(p.side)?
                }
            };
            add_onsite_disorder(&clean_box, &site)?.eigenvalues()
        };
        let stats = ensemble_dos(build, p.realizations, p.seed, &dos_params)?;
        let fill = gap_fill_fraction(&clean, &stats)?;
        let max_se = stats.std_error.iter().copied().fold(0.0, f64::max);
        table.push(vec![w.into(), fill.into(), max_se.into(), stats.mean.coverage.into()]);
    }
    let mut out = Output::new(table);
    out.note("field", json!(field));
    out.note("clean_bands", json!(clean.intervals()));
    let widths = out.table.values("width");
    let fills = out.table.values("gap_fill");
    let mut positive: Vec<(f64, f64)> = widths.iter().copied().zip(fills.iter().copied()).filter(|(w, _)| *w > 0.0).collect();
    positive.sort_by(|a, b| a.0.total_cmp(&b.0));
    let monotone = positive.windows(2).all(|w| w[1].1 >= w[0].1);
    out.checks.push(Check::numerical("monotone_fill", monotone, format!("fills {} at widths {widths:?}", sci(&fills))));
    if let Some(i) = widths.iter().position(|w| *w == 0.0) {
        out.checks.push(Check::below("clean_collapse", fills[i], p.collapse_tol));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn cfg(command: &str, flags: Value) -> RunConfig {
        resolve(command, Map::new(), flags.as_object().unwrap().clone()).unwrap()
    }

    #[test]
    fn butterfly_rows_have_q_bands_per_flux() {
        let a = run(&cfg("butterfly", json!({"q_max": 5, "kgrid": 8}))).unwrap();
        let q = a.table.values("q");
        for f in RationalFlux::farey_up_to(5) {
            let rows = q.iter().zip(a.table.values("p")).filter(|(qq, pp)| **qq == f.q() as f64 && *pp == f.p() as f64);
            assert_eq!(rows.count(), f.dim());
        }
        assert!(a.passed(), "{:?}", a.checks);
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.0);
        assert_eq!(quantile(&v, 0.25), 1.0);
        assert_eq!(quantile(&[0.0, 1.0], 0.75), 0.75);
    }

    #[test]
    fn half_flux_chern_is_infeasible() {
        let err = run(&cfg("chern", json!({"flux": "1/2"}))).unwrap_err();
        assert_eq!(err.exit_code(), 4);
        assert!(err.to_string().contains("band crossing"), "{err}");
    }

    #[test]
    fn infeasible_torus_is_reported() {
        let err = run(&cfg("gauge-check", json!({"field": "0.11"}))).unwrap_err();
        assert_eq!(err.exit_code(), 4);
        let err = run(&cfg("continuum-spectrum", json!({"field": 10.0, "snap": false}))).unwrap_err();
        assert_eq!(err.exit_code(), 4);
        assert!(err.to_string().contains("nearest feasible"), "{err}");
    }

    #[test]
    fn failing_check_maps_to_exit_three() {
        // Lowering the field makes the strong-field comparison worse.
        let a = run(&cfg("lll-compare", json!({"field": "10,5", "n_ll": 3, "potential": {"kind": "cosine-square", "amplitude": 0.1}}))).unwrap();
        assert!(a.check("cluster_separation").unwrap().passed);
        assert!(!a.check("strictly_decreasing").unwrap().passed);
        assert_eq!(a.verdict().unwrap_err().exit_code(), 3);
    }
}
