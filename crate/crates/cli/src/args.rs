//! Command-line surface. Flags carry the same names as config keys; values
//! left unset fall through to the config file and then to defaults.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Map, Value};

#[derive(Debug, Parser)]
#[command(name = "magspec", version, about = "Spectra of electrons in magnetic fields on lattices and in the continuum")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize, Default)]
pub struct Common {
    /// Flux per plaquette as a reduced fraction p/q (comma list for peierls-check)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flux: Option<String>,
    /// Grid points per Brillouin-zone direction
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kgrid: Option<usize>,
    /// Spectral gaps narrower than this are merged
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_tol: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Output path; stdout when absent
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    /// csv or json
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    /// TOML or JSON parameter file; a run's .meta.json replays that run
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ButterflyArgs {
    #[arg(long = "qmax")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_max: Option<i64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symmetry_tol: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct ToleranceArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct PlainArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct GaugeArgs {
    /// Field strength; fractions such as 1/8 are accepted
    #[arg(long = "B", alias = "field")]
    #[serde(rename = "field", skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct ContinuumArgs {
    /// Field strength, or a comma list for the sweep commands
    #[arg(long = "B", alias = "field")]
    #[serde(rename = "field", skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    /// Unit cells per torus side
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cells: Option<usize>,
    /// Landau levels kept
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_ll: Option<usize>,
    /// Amplitude of the cosine lattice potential
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    /// Snap each field to the nearest torus-compatible value
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snap: Option<bool>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_step: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct DisorderArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side: Option<usize>,
    /// Comma list of disorder strengths W
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub widths: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub realizations: Option<usize>,
    /// uniform or gaussian
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distribution: Option<String>,
    /// onsite or bump
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_b: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Default the bump scale to 1/B instead of B
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inverse_scale: Option<bool>,
    /// Gaussian smoothing width of the density of states
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dos_width: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    /// Energy window lo,hi
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub collapse_tol: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Band ranges and quantiles for every reduced flux p/q with q <= qmax
    Butterfly(ButterflyArgs),
    /// Band intervals of the Hofstadter fibers at one flux
    FiberSpectrum(PlainArgs),
    /// Harper spectra over (theta, k) against the Hofstadter spectrum
    HarperSpectrum(ToleranceArgs),
    /// Quantized square-lattice dispersion against the Hofstadter fiber
    PeierlsCheck(ToleranceArgs),
    /// Symmetric-gauge torus against Landau-gauge fibers
    GaugeCheck(GaugeArgs),
    /// Chern numbers of the Hofstadter bands
    Chern(PlainArgs),
    /// Spectrum of a periodic potential in a truncated Landau basis
    ContinuumSpectrum(ContinuumArgs),
    /// Lowest Landau cluster against its Harper-type compression
    LllCompare(ContinuumArgs),
    /// Propagation defect of the lowest-level model
    DynamicsDefect(ContinuumArgs),
    /// Disorder-averaged density of states and gap filling
    DisorderDos(DisorderArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Butterfly(_) => "butterfly",
            Command::FiberSpectrum(_) => "fiber-spectrum",
            Command::HarperSpectrum(_) => "harper-spectrum",
            Command::PeierlsCheck(_) => "peierls-check",
            Command::GaugeCheck(_) => "gauge-check",
            Command::Chern(_) => "chern",
            Command::ContinuumSpectrum(_) => "continuum-spectrum",
            Command::LllCompare(_) => "lll-compare",
            Command::DynamicsDefect(_) => "dynamics-defect",
            Command::DisorderDos(_) => "disorder-dos",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Butterfly(a) => &a.common,
            Command::FiberSpectrum(a) | Command::Chern(a) => &a.common,
            Command::HarperSpectrum(a) | Command::PeierlsCheck(a) => &a.common,
            Command::GaugeCheck(a) => &a.common,
            Command::ContinuumSpectrum(a) | Command::LllCompare(a) | Command::DynamicsDefect(a) => &a.common,
            Command::DisorderDos(a) => &a.common,
        }
    }

    pub fn config_path(&self) -> Option<&PathBuf> {
        self.common().config.as_ref()
    }

    /// Flags that were given, keyed like the config.
    pub fn flags(&self) -> Map<String, Value> {
        let v = match self {
            Command::Butterfly(a) => json!(a),
            Command::FiberSpectrum(a) | Command::Chern(a) => json!(a),
            Command::HarperSpectrum(a) | Command::PeierlsCheck(a) => json!(a),
            Command::GaugeCheck(a) => json!(a),
            Command::ContinuumSpectrum(a) | Command::LllCompare(a) | Command::DynamicsDefect(a) => json!(a),
            Command::DisorderDos(a) => json!(a),
        };
        let Value::Object(mut m) = v else { unreachable!("argument structs serialize to objects") };
        if let Some(a) = m.remove("amplitude") {
            m.insert("potential".into(), json!({"kind": "cosine-square", "amplitude": a}));
        }
        m
    }
}
