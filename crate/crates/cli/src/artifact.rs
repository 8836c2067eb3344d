//! Output tables, metadata and atomic file emission.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{Format, RunConfig};
use crate::error::{CliError, CliResult};

pub const TOOL: &str = "magspec";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Decimal places for real columns in CSV output.
pub const CSV_DECIMALS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => format_real(*x),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Real(x) => Some(*x),
            _ => None,
        }
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Fixed-point with [`CSV_DECIMALS`] places; negative zero prints as zero.
pub fn format_real(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.CSV_DECIMALS$}");
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Real values of one column.
    pub fn values(&self, name: &str) -> Vec<f64> {
        let Some(i) = self.column(name) else { return Vec::new() };
        self.rows.iter().filter_map(|r| r[i].as_f64()).collect()
    }

    fn records(&self) -> Vec<Value> {
        self.rows
            .iter()
            .map(|r| Value::Object(self.columns.iter().cloned().zip(r.iter().map(|c| json!(c))).collect()))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    /// A numerical property of the result.
    Numerical,
    /// A precondition of the model, such as cluster separation.
    Feasibility,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn numerical(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), kind: CheckKind::Numerical, passed, detail: detail.into() }
    }

    pub fn feasibility(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), kind: CheckKind::Feasibility, passed, detail: detail.into() }
    }

    /// `value <= bound`.
    pub fn below(name: &str, value: f64, bound: f64) -> Self {
        Check::numerical(name, value <= bound, format!("{value:.3e} <= {bound:.1e}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifact {
    pub config: RunConfig,
    pub table: Table,
    pub summary: Map<String, Value>,
    pub checks: Vec<Check>,
    pub wall_time: f64,
}

impl RunArtifact {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Error for the first failing check; feasibility failures take precedence.
    pub fn verdict(&self) -> CliResult<()> {
        let failing = |kind| self.checks.iter().filter(move |c: &&Check| !c.passed && c.kind == kind);
        if let Some(c) = failing(CheckKind::Feasibility).next() {
            return Err(CliError::Infeasible(format!("{}: {}", c.name, c.detail)));
        }
        if let Some(c) = failing(CheckKind::Numerical).next() {
            return Err(CliError::Check(format!("{}: {}", c.name, c.detail)));
        }
        Ok(())
    }

    /// Everything needed to reproduce the run, plus wall time.
    pub fn metadata(&self) -> Value {
        json!({
            "tool": TOOL,
            "version": VERSION,
            "command": self.config.name(),
            "config": self.config.to_value(),
            "seed": self.config.params.seed(),
            "wall_time_s": self.wall_time,
            "summary": self.summary,
            "checks": self.checks,
        })
    }

    /// CSV text: `#` header lines (no timing), column names, rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {TOOL} {VERSION} {}", self.config.name());
        // The output path is left out so that the file does not depend on where it was written.
        let mut config = self.config.to_value();
        if let Some(m) = config.as_object_mut() {
            m.remove("out");
        }
        let _ = writeln!(out, "# config: {config}");
        for (k, v) in &self.summary {
            let _ = writeln!(out, "# {k}: {}", summary_text(v));
        }
        for c in &self.checks {
            let _ = writeln!(out, "# check {}: {} ({})", c.name, if c.passed { "PASS" } else { "FAIL" }, c.detail);
        }
        let _ = writeln!(out, "{}", self.table.columns.join(","));
        for r in &self.table.rows {
            let _ = writeln!(out, "{}", r.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.metadata();
        v["columns"] = json!(self.table.columns);
        v["rows"] = Value::Array(self.table.records());
        v
    }

    /// Writes to `config.out` (or stdout) in the configured format. CSV
    /// output gets a `<out>.meta.json` sidecar. Files appear atomically;
    /// on failure none are left behind.
    pub fn emit(&self) -> CliResult<Vec<PathBuf>> {
        let Some(path) = &self.config.out else {
            let text = match self.config.format {
                Format::Csv => self.to_csv(),
                Format::Json => pretty(&self.to_json()),
            };
            std::io::stdout().write_all(text.as_bytes()).map_err(|e| io_error(Path::new("<stdout>"), e))?;
            return Ok(Vec::new());
        };
        match self.config.format {
            Format::Json => {
                write_atomic(path, &pretty(&self.to_json()))?;
                Ok(vec![path.clone()])
            }
            Format::Csv => {
                let meta = sidecar_path(path);
                write_atomic(path, &self.to_csv())?;
                if let Err(e) = write_atomic(&meta, &pretty(&self.metadata())) {
                    let _ = std::fs::remove_file(path);
                    return Err(e);
                }
                Ok(vec![path.clone(), meta])
            }
        }
    }
}

fn summary_text(v: &Value) -> String {
    match v {
        Value::Number(n) => n.as_f64().filter(|_| n.is_f64()).map_or(n.to_string(), format_real),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".meta.json");
    path.with_file_name(name)
}

fn io_error(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io { path: path.display().to_string(), source }
}

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| io_error(&dir, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| io_error(path, e))?;
    tmp.as_file().sync_all().map_err(|e| io_error(path, e))?;
    tmp.persist(path).map_err(|e| io_error(path, e.error))?;
    Ok(())
}
