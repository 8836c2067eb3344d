//! Run configuration: defaults, then a config file, then command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};

use magspec_core::disorder::CouplingDistribution;
use magspec_core::RationalFlux;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(CliError::config(format!("unknown format {s:?}; expected csv or json"))),
        }
    }
}

/// Validated parameters of one command.
pub trait Params: Serialize + DeserializeOwned + Default {
    fn validate(&self) -> CliResult<()>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ButterflyParams {
    pub q_max: i64,
    pub kgrid: usize,
    /// Tolerance for the E -> -E and flux -> 1 - flux symmetry checks.
    pub symmetry_tol: f64,
}

impl Default for ButterflyParams {
    fn default() -> Self {
        ButterflyParams { q_max: 20, kgrid: 64, symmetry_tol: 5e-3 }
    }
}

impl Params for ButterflyParams {
    fn validate(&self) -> CliResult<()> {
        at_least("q_max", self.q_max, 1)?;
        at_least("kgrid", self.kgrid as i64, 1)?;
        positive("symmetry_tol", self.symmetry_tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FiberSpectrumParams {
    pub flux: RationalFlux,
    pub kgrid: usize,
    pub gap_tol: Option<f64>,
}

impl Default for FiberSpectrumParams {
    fn default() -> Self {
        FiberSpectrumParams { flux: RationalFlux::new(1, 3).unwrap(), kgrid: 64, gap_tol: None }
    }
}

impl Params for FiberSpectrumParams {
    fn validate(&self) -> CliResult<()> {
        at_least("kgrid", self.kgrid as i64, 1)?;
        optional_positive("gap_tol", self.gap_tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HarperSpectrumParams {
    pub flux: RationalFlux,
    /// Grid per parameter over the reduced zone.
    pub kgrid: usize,
    pub gap_tol: Option<f64>,
    pub tolerance: f64,
}

impl Default for HarperSpectrumParams {
    fn default() -> Self {
        HarperSpectrumParams { flux: RationalFlux::new(1, 3).unwrap(), kgrid: 64, gap_tol: None, tolerance: 1e-2 }
    }
}

impl Params for HarperSpectrumParams {
    fn validate(&self) -> CliResult<()> {
        at_least("kgrid", self.kgrid as i64, 2)?;
        optional_positive("gap_tol", self.gap_tol)?;
        positive("tolerance", self.tolerance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PeierlsCheckParams {
    pub flux: Vec<RationalFlux>,
    pub kgrid: usize,
    pub tolerance: f64,
}

impl Default for PeierlsCheckParams {
    fn default() -> Self {
        PeierlsCheckParams {
            flux: vec![RationalFlux::new(1, 3).unwrap(), RationalFlux::new(2, 5).unwrap()],
            kgrid: 16,
            tolerance: 1e-10,
        }
    }
}

impl Params for PeierlsCheckParams {
    fn validate(&self) -> CliResult<()> {
        non_empty("flux", self.flux.len())?;
        at_least("kgrid", self.kgrid as i64, 1)?;
        positive("tolerance", self.tolerance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaugeCheckParams {
    pub field: f64,
    pub side: usize,
    pub tolerance: f64,
    /// Grid for the informational comparison with the full bands.
    pub kgrid: usize,
    pub gap_tol: Option<f64>,
}

impl Default for GaugeCheckParams {
    fn default() -> Self {
        GaugeCheckParams { field: 0.125, side: 16, tolerance: 0.05, kgrid: 64, gap_tol: None }
    }
}

impl Params for GaugeCheckParams {
    fn validate(&self) -> CliResult<()> {
        finite("field", self.field)?;
        at_least("side", self.side as i64, 2)?;
        at_least("kgrid", self.kgrid as i64, 1)?;
        optional_positive("gap_tol", self.gap_tol)?;
        positive("tolerance", self.tolerance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChernParams {
    pub flux: RationalFlux,
    pub kgrid: usize,
}

impl Default for ChernParams {
    fn default() -> Self {
        ChernParams { flux: RationalFlux::new(1, 3).unwrap(), kgrid: 30 }
    }
}

impl Params for ChernParams {
    fn validate(&self) -> CliResult<()> {
        at_least("kgrid", self.kgrid as i64, 2)
    }
}

/// Periodic potential for the continuum commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    /// `amplitude * (2cos(2 pi x) + 2cos(2 pi y))`.
    CosineSquare { amplitude: f64 },
    /// Explicit harmonics `[n, m, re, im]` in units of `2 pi / a`.
    Harmonics { terms: Vec<[f64; 4]> },
    /// One smooth disorder realization periodized over the torus.
    Disorder {
        width: f64,
        sigma_b: f64,
        grid: usize,
        /// Defaults to the field.
        lambda: Option<f64>,
        cutoff: usize,
    },
}

impl Default for PotentialSpec {
    fn default() -> Self {
        PotentialSpec::CosineSquare { amplitude: 1.0 }
    }
}

impl PotentialSpec {
    fn validate(&self) -> CliResult<()> {
        match self {
            PotentialSpec::CosineSquare { amplitude } => finite("potential.amplitude", *amplitude),
            PotentialSpec::Harmonics { terms } => {
                for t in terms {
                    if t.iter().any(|x| !x.is_finite()) || t[0].fract() != 0.0 || t[1].fract() != 0.0 {
                        return Err(CliError::config(format!("potential.terms entry {t:?} needs integer n, m and finite c")));
                    }
                }
                Ok(())
            }
            PotentialSpec::Disorder { width, sigma_b, grid, lambda, .. } => {
                if !(*width >= 0.0 && width.is_finite()) {
                    return Err(CliError::config(format!("potential.width must be finite and >= 0, got {width}")));
                }
                positive("potential.sigma_b", *sigma_b)?;
                at_least("potential.grid", *grid as i64, 1)?;
                optional_positive("potential.lambda", *lambda)
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            PotentialSpec::CosineSquare { amplitude } => *amplitude == 0.0,
            PotentialSpec::Harmonics { terms } => terms.iter().all(|t| t[2] == 0.0 && t[3] == 0.0),
            PotentialSpec::Disorder { width, .. } => *width == 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContinuumParams {
    pub field: f64,
    /// Unit cells per torus side.
    pub cells: usize,
    pub n_ll: usize,
    pub potential: PotentialSpec,
    /// Move the field to the nearest value with an integer flux through the torus.
    pub snap: bool,
    pub seed: u64,
    /// Relative tolerance of the free Landau-level check when the potential vanishes.
    pub tolerance: f64,
}

impl Default for ContinuumParams {
    fn default() -> Self {
        ContinuumParams {
            field: 10.0,
            cells: 2,
            n_ll: 6,
            potential: PotentialSpec::default(),
            snap: true,
            seed: 0,
            tolerance: 1e-10,
        }
    }
}

impl Params for ContinuumParams {
    fn validate(&self) -> CliResult<()> {
        positive("field", self.field)?;
        at_least("cells", self.cells as i64, 1)?;
        at_least("n_ll", self.n_ll as i64, 1)?;
        positive("tolerance", self.tolerance)?;
        self.potential.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LllCompareParams {
    pub field: Vec<f64>,
    pub cells: usize,
    pub n_ll: usize,
    pub potential: PotentialSpec,
    pub snap: bool,
    pub seed: u64,
}

impl Default for LllCompareParams {
    fn default() -> Self {
        LllCompareParams {
            field: vec![10.0, 20.0, 40.0],
            cells: 2,
            n_ll: 6,
            potential: PotentialSpec::default(),
            snap: true,
            seed: 0,
        }
    }
}

impl Params for LllCompareParams {
    fn validate(&self) -> CliResult<()> {
        non_empty("field", self.field.len())?;
        for b in &self.field {
            positive("field", *b)?;
        }
        at_least("cells", self.cells as i64, 1)?;
        at_least("n_ll", self.n_ll as i64, 2)?;
        self.potential.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsDefectParams {
    pub field: Vec<f64>,
    pub cells: usize,
    pub n_ll: usize,
    pub potential: PotentialSpec,
    pub snap: bool,
    pub seed: u64,
    pub t_max: f64,
    pub t_step: f64,
    /// Bound on `d(0)`.
    pub tolerance: f64,
}

impl Default for DynamicsDefectParams {
    fn default() -> Self {
        DynamicsDefectParams {
            field: vec![10.0, 20.0, 40.0],
            cells: 2,
            n_ll: 6,
            potential: PotentialSpec::default(),
            snap: true,
            seed: 0,
            t_max: 5.0,
            t_step: 0.5,
            tolerance: 1e-10,
        }
    }
}

impl DynamicsDefectParams {
    pub fn times(&self) -> Vec<f64> {
        let n = (self.t_max / self.t_step + 1e-9).floor() as usize;
        (0..=n).map(|i| i as f64 * self.t_step).collect()
    }
}

impl Params for DynamicsDefectParams {
    fn validate(&self) -> CliResult<()> {
        non_empty("field", self.field.len())?;
        for b in &self.field {
            positive("field", *b)?;
        }
        at_least("cells", self.cells as i64, 1)?;
        at_least("n_ll", self.n_ll as i64, 2)?;
        positive("t_max", self.t_max)?;
        positive("t_step", self.t_step)?;
        positive("tolerance", self.tolerance)?;
        self.potential.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistributionKind {
    #[default]
    Uniform,
    Gaussian,
}

impl DistributionKind {
    /// Uniform on `[-W/2, W/2)`, or Gaussian with standard deviation `W`.
    pub fn with_strength(self, w: f64) -> CouplingDistribution {
        match self {
            DistributionKind::Uniform => CouplingDistribution::Uniform { width: w },
            DistributionKind::Gaussian => CouplingDistribution::Gaussian { sigma: w },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    #[default]
    Onsite,
    Bump,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DisorderDosParams {
    pub flux: RationalFlux,
    pub side: usize,
    pub widths: Vec<f64>,
    pub realizations: usize,
    pub seed: u64,
    pub distribution: DistributionKind,
    pub profile: ProfileKind,
    pub sigma_b: f64,
    /// Scale of the smooth profile; defaults to the field `B = flux / 2`.
    pub lambda: Option<f64>,
    /// Use `1/B` instead of `B` as the default scale.
    pub inverse_scale: bool,
    pub dos_width: f64,
    pub bins: usize,
    pub range: [f64; 2],
    /// Grid for the clean band intervals.
    pub kgrid: usize,
    pub gap_tol: f64,
    /// Largest gap fill allowed at zero disorder.
    pub collapse_tol: f64,
}

impl Default for DisorderDosParams {
    fn default() -> Self {
        DisorderDosParams {
            flux: RationalFlux::new(1, 3).unwrap(),
            side: 30,
            widths: vec![0.0, 0.5, 1.0, 2.0],
            realizations: 20,
            seed: 0,
            distribution: DistributionKind::Uniform,
            profile: ProfileKind::Onsite,
            sigma_b: 1.0,
            lambda: None,
            inverse_scale: false,
            dos_width: 0.02,
            bins: 900,
            range: [-4.5, 4.5],
            kgrid: 200,
            gap_tol: 0.05,
            collapse_tol: 0.01,
        }
    }
}

impl Params for DisorderDosParams {
    fn validate(&self) -> CliResult<()> {
        at_least("side", self.side as i64, 2)?;
        non_empty("widths", self.widths.len())?;
        for w in &self.widths {
            if !(w.is_finite() && *w >= 0.0) {
                return Err(CliError::config(format!("widths must be finite and >= 0, got {w}")));
            }
        }
        at_least("realizations", self.realizations as i64, 1)?;
        positive("sigma_b", self.sigma_b)?;
        optional_positive("lambda", self.lambda)?;
        positive("dos_width", self.dos_width)?;
        at_least("bins", self.bins as i64, 1)?;
        if !(self.range[0] < self.range[1]) {
            return Err(CliError::config(format!("range must be increasing, got {:?}", self.range)));
        }
        at_least("kgrid", self.kgrid as i64, 1)?;
        positive("gap_tol", self.gap_tol)?;
        positive("collapse_tol", self.collapse_tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum CommandParams {
    Butterfly(ButterflyParams),
    FiberSpectrum(FiberSpectrumParams),
    HarperSpectrum(HarperSpectrumParams),
    PeierlsCheck(PeierlsCheckParams),
    GaugeCheck(GaugeCheckParams),
    Chern(ChernParams),
    ContinuumSpectrum(ContinuumParams),
    LllCompare(LllCompareParams),
    DynamicsDefect(DynamicsDefectParams),
    DisorderDos(DisorderDosParams),
}

impl CommandParams {
    pub fn name(&self) -> &'static str {
        match self {
            CommandParams::Butterfly(_) => "butterfly",
            CommandParams::FiberSpectrum(_) => "fiber-spectrum",
            CommandParams::HarperSpectrum(_) => "harper-spectrum",
            CommandParams::PeierlsCheck(_) => "peierls-check",
            CommandParams::GaugeCheck(_) => "gauge-check",
            CommandParams::Chern(_) => "chern",
            CommandParams::ContinuumSpectrum(_) => "continuum-spectrum",
            CommandParams::LllCompare(_) => "lll-compare",
            CommandParams::DynamicsDefect(_) => "dynamics-defect",
            CommandParams::DisorderDos(_) => "disorder-dos",
        }
    }

    /// Seed used by the run, when the command is random.
    pub fn seed(&self) -> Option<u64> {
        match self {
            CommandParams::ContinuumSpectrum(p) => Some(p.seed),
            CommandParams::LllCompare(p) => Some(p.seed),
            CommandParams::DynamicsDefect(p) => Some(p.seed),
            CommandParams::DisorderDos(p) => Some(p.seed),
            _ => None,
        }
    }
}

pub const COMMANDS: [&str; 10] = [
    "butterfly",
    "fiber-spectrum",
    "harper-spectrum",
    "peierls-check",
    "gauge-check",
    "chern",
    "continuum-spectrum",
    "lll-compare",
    "dynamics-defect",
    "disorder-dos",
];

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub params: CommandParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub fn name(&self) -> &'static str {
        self.params.name()
    }

    /// Resolved config as a flat JSON object, the form accepted by `--config`.
    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_value())
    }
}

/// Reads a TOML or JSON config file. A JSON object carrying a `config` key,
/// such as a run's metadata sidecar, contributes that key's value.
pub fn load_config_file(path: &Path) -> CliResult<Map<String, Value>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
    let is_toml = path.extension().is_some_and(|e| e == "toml");
    let value: Value = if is_toml {
        let t: toml::Table =
            toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        serde_json::to_value(t).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?
    } else {
        serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?
    };
    let value = match value {
        Value::Object(mut m) if m.get("config").is_some_and(Value::is_object) => m.remove("config").unwrap(),
        v => v,
    };
    match value {
        Value::Object(m) => Ok(m),
        _ => Err(CliError::config(format!("{}: expected a table of parameters", path.display()))),
    }
}

/// Merges defaults, file values and flag values for `command`, then validates.
pub fn resolve(command: &str, file: Map<String, Value>, flags: Map<String, Value>) -> CliResult<RunConfig> {
    let params = match command {
        "butterfly" => CommandParams::Butterfly(merge(command, &file, &flags)?),
        "fiber-spectrum" => CommandParams::FiberSpectrum(merge(command, &file, &flags)?),
        "harper-spectrum" => CommandParams::HarperSpectrum(merge(command, &file, &flags)?),
        "peierls-check" => CommandParams::PeierlsCheck(merge(command, &file, &flags)?),
        "gauge-check" => CommandParams::GaugeCheck(merge(command, &file, &flags)?),
        "chern" => CommandParams::Chern(merge(command, &file, &flags)?),
        "continuum-spectrum" => CommandParams::ContinuumSpectrum(merge(command, &file, &flags)?),
        "lll-compare" => CommandParams::LllCompare(merge(command, &file, &flags)?),
        "dynamics-defect" => CommandParams::DynamicsDefect(merge(command, &file, &flags)?),
        "disorder-dos" => CommandParams::DisorderDos(merge(command, &file, &flags)?),
        other => return Err(CliError::config(format!("unknown command {other:?}; expected one of {COMMANDS:?}"))),
    };
    let pick = |key: &str| flags.get(key).or_else(|| file.get(key)).filter(|v| !v.is_null());
    let out = match pick("out") {
        Some(Value::String(s)) => Some(PathBuf::from(s)),
        Some(v) => return Err(CliError::config(format!("out must be a path, got {v}"))),
        None => None,
    };
    let format = match pick("format") {
        Some(Value::String(s)) => s.parse()?,
        Some(v) => return Err(CliError::config(format!("format must be csv or json, got {v}"))),
        None => Format::default(),
    };
    Ok(RunConfig { params, out, format })
}

const RESERVED: [&str; 3] = ["command", "out", "format"];

fn merge<P: Params>(command: &str, file: &Map<String, Value>, flags: &Map<String, Value>) -> CliResult<P> {
    let Value::Object(mut merged) = serde_json::to_value(P::default()).expect("defaults serialize") else {
        unreachable!("parameter structs serialize to objects")
    };
    let known: Vec<String> = merged.keys().cloned().collect();
    let check_key = |key: &str, origin: &str| {
        if known.iter().any(|k| k == key) || RESERVED.contains(&key) {
            Ok(())
        } else {
            Err(CliError::config(format!("unknown {origin} {key:?} for {command}; valid keys: {}", known.join(", "))))
        }
    };
    if let Some(Value::String(c)) = file.get("command") {
        if c != command {
            return Err(CliError::config(format!("config file is for {c:?}, not {command:?}")));
        }
    }
    for (key, value) in file {
        check_key(key, "config key")?;
        if let Some(default) = merged.get(key) {
            let v = coerce(key, default, value.clone())?;
            merged.insert(key.clone(), v);
        }
    }
    for (key, value) in flags {
        if RESERVED.contains(&key.as_str()) {
            continue;
        }
        check_key(key, "flag")?;
        let v = coerce(key, &merged[key], value.clone())?;
        if let Some(old) = file.get(key) {
            if *old != v {
                log::info!("flag --{} = {v} overrides config file value {old}", key.replace('_', "-"));
            }
        }
        merged.insert(key.clone(), v);
    }
    let params: P = serde_json::from_value(Value::Object(merged))
        .map_err(|e| CliError::config(format!("{command}: {e}")))?;
    params.validate()?;
    Ok(params)
}

/// Lets strings stand in for numbers (`"1/8"`) and comma lists for arrays.
fn coerce(key: &str, default: &Value, value: Value) -> CliResult<Value> {
    match (default, value) {
        (Value::Array(_), Value::String(s)) => {
            let item = default.as_array().and_then(|a| a.first()).cloned().unwrap_or(Value::Null);
            let parts = s.split(',').map(|t| coerce(key, &item, Value::String(t.trim().to_string())));
            Ok(Value::Array(parts.collect::<CliResult<_>>()?))
        }
        (Value::Number(_), Value::String(s)) => Ok(serde_json::json!(parse_real(key, &s)?)),
        (_, v) => Ok(v),
    }
}

/// Parses a decimal or a fraction `p/q`.
pub fn parse_real(key: &str, s: &str) -> CliResult<f64> {
    let bad = || CliError::config(format!("{key}: cannot parse {s:?} as a number"));
    let x = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            let q: f64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0.0 {
                return Err(bad());
            }
            p / q
        }
        None => s.trim().parse().map_err(|_| bad())?,
    };
    if x.is_finite() {
        Ok(x)
    } else {
        Err(bad())
    }
}

fn at_least(key: &str, v: i64, min: i64) -> CliResult<()> {
    if v < min {
        return Err(CliError::config(format!("{key} must be >= {min}, got {v}")));
    }
    Ok(())
}

fn positive(key: &str, v: f64) -> CliResult<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(CliError::config(format!("{key} must be positive, got {v}")));
    }
    Ok(())
}

fn optional_positive(key: &str, v: Option<f64>) -> CliResult<()> {
    v.map_or(Ok(()), |x| positive(key, x))
}

fn finite(key: &str, v: f64) -> CliResult<()> {
    if !v.is_finite() {
        return Err(CliError::config(format!("{key} must be finite, got {v}")));
    }
    Ok(())
}

fn non_empty(key: &str, n: usize) -> CliResult<()> {
    if n == 0 {
        return Err(CliError::config(format!("{key} must not be empty")));
    }
    Ok(())
}
