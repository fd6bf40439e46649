//! Serialization: the field container format, CSV reports, JSON run
//! summaries, and the flat key-value config format.
//!
//! The container is a JSON document with a small header (schema version, grid
//! parameters, field kind, flags) and a flat values array in row-major node
//! order; matrix fields store the upper triangle row-wise per node. All
//! floating-point values are written with 17 significant digits so a write /
//! read cycle reproduces every `f64` bitwise.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fields::{FieldError, MatrixField, Sampling, ScalarField, TorusGrid, VectorField};
use crate::util::fmt_f64;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema version {0} (expected {SCHEMA_VERSION})")]
    SchemaVersion(u32),
    #[error("container holds a {found} field, expected {expected}")]
    KindMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error("container values have length {found}, expected {expected} for kind {kind} on an n={n}, m={m} grid")]
    LengthMismatch {
        expected: usize,
        found: usize,
        kind: &'static str,
        n: usize,
        m: usize,
    },
    #[error("config line {line}: expected `key = value`, got `{content}`")]
    BadConfigLine { line: usize, content: String },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Discriminates the three field layouts a container can hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Scalar,
    Vector,
    Matrix,
}

impl FieldKind {
    fn name(self) -> &'static str {
        match self {
            FieldKind::Scalar => "scalar",
            FieldKind::Vector => "vector",
            FieldKind::Matrix => "matrix",
        }
    }

    /// Number of values stored per grid node.
    fn components(self, n: usize) -> usize {
        match self {
            FieldKind::Scalar => 1,
            FieldKind::Vector => n,
            FieldKind::Matrix => n * (n + 1) / 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum SamplingTag {
    Smooth,
    Indicator,
}

impl From<Sampling> for SamplingTag {
    fn from(s: Sampling) -> Self {
        match s {
            Sampling::Smooth => SamplingTag::Smooth,
            Sampling::Indicator => SamplingTag::Indicator,
        }
    }
}

impl From<SamplingTag> for Sampling {
    fn from(t: SamplingTag) -> Self {
        match t {
            SamplingTag::Smooth => Sampling::Smooth,
            SamplingTag::Indicator => Sampling::Indicator,
        }
    }
}

/// On-disk form of a periodic field: header plus flat values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldContainer {
    pub schema_version: u32,
    pub n: usize,
    pub m: usize,
    pub field_kind: FieldKind,
    pub psd_flag: bool,
    sampling: SamplingTag,
    pub values: Vec<f64>,
}

impl FieldContainer {
    fn check(&self) -> Result<(), IoError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(IoError::SchemaVersion(self.schema_version));
        }
        let nodes = self.m.pow(self.n as u32);
        let expected = nodes * self.field_kind.components(self.n);
        if self.values.len() != expected {
            return Err(IoError::LengthMismatch {
                expected,
                found: self.values.len(),
                kind: self.field_kind.name(),
                n: self.n,
                m: self.m,
            });
        }
        Ok(())
    }

    pub fn from_scalar(field: &ScalarField) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            n: field.grid().n(),
            m: field.grid().m(),
            field_kind: FieldKind::Scalar,
            psd_flag: false,
            sampling: field.sampling().into(),
            values: field.values().to_vec(),
        }
    }

    pub fn from_vector(field: &VectorField) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            n: field.grid().n(),
            m: field.grid().m(),
            field_kind: FieldKind::Vector,
            psd_flag: false,
            sampling: SamplingTag::Smooth,
            values: field.values().to_vec(),
        }
    }

    pub fn from_matrix(field: &MatrixField) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            n: field.grid().n(),
            m: field.grid().m(),
            field_kind: FieldKind::Matrix,
            psd_flag: field.psd_flag(),
            sampling: field.sampling().into(),
            values: field.values().to_vec(),
        }
    }

    pub fn into_scalar(self) -> Result<ScalarField, IoError> {
        self.check()?;
        if self.field_kind != FieldKind::Scalar {
            return Err(IoError::KindMismatch {
                expected: "scalar",
                found: self.field_kind.name(),
            });
        }
        let grid = TorusGrid::new(self.n, self.m)?;
        Ok(ScalarField::new(grid, self.values)?.with_sampling(self.sampling.into()))
    }

    pub fn into_vector(self) -> Result<VectorField, IoError> {
        self.check()?;
        if self.field_kind != FieldKind::Vector {
            return Err(IoError::KindMismatch {
                expected: "vector",
                found: self.field_kind.name(),
            });
        }
        let grid = TorusGrid::new(self.n, self.m)?;
        Ok(VectorField::new(grid, self.values)?)
    }

    pub fn into_matrix(self) -> Result<MatrixField, IoError> {
        self.check()?;
        if self.field_kind != FieldKind::Matrix {
            return Err(IoError::KindMismatch {
                expected: "matrix",
                found: self.field_kind.name(),
            });
        }
        let grid = TorusGrid::new(self.n, self.m)?;
        Ok(MatrixField::new(grid, self.values, self.psd_flag)?
            .with_sampling(self.sampling.into()))
    }

    /// Renders the container as a JSON document with every value at 17
    /// significant digits (serde's default shortest form would already
    /// round-trip, but a fixed width keeps the bytes independent of the
    /// magnitude pattern of the data).
    pub fn to_document(&self) -> String {
        let mut out = String::new();
        out.push_str("{\n");
        let _ = writeln!(out, "  \"schema_version\": {},", self.schema_version);
        let _ = writeln!(out, "  \"n\": {},", self.n);
        let _ = writeln!(out, "  \"m\": {},", self.m);
        let _ = writeln!(out, "  \"field_kind\": \"{}\",", self.field_kind.name());
        let _ = writeln!(out, "  \"psd_flag\": {},", self.psd_flag);
        let sampling = match self.sampling {
            SamplingTag::Smooth => "smooth",
            SamplingTag::Indicator => "indicator",
        };
        let _ = writeln!(out, "  \"sampling\": \"{sampling}\",");
        out.push_str("  \"values\": [");
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            if i % 4 == 0 {
                out.push_str("\n    ");
            } else {
                out.push(' ');
            }
            out.push_str(&fmt_f64(*v));
        }
        out.push_str("\n  ]\n}\n");
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), IoError> {
        std::fs::write(path, self.to_document())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, IoError> {
        let text = std::fs::read_to_string(path)?;
        let container: FieldContainer = serde_json::from_str(&text)?;
        container.check()?;
        Ok(container)
    }
}

/// One CSV cell; integers and labels keep their natural form, floats are
/// written at 17 significant digits.
#[derive(Debug, Clone)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => fmt_f64(*v),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// Renders a CSV report with a header row. Output bytes depend only on the
/// rows: fixed column order, `\n` line endings, no quoting (cells are numeric
/// or simple labels).
pub fn render_csv(header: &[&str], rows: &[Vec<Cell>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        let line: Vec<String> = row.iter().map(Cell::render).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<Cell>]) -> Result<(), IoError> {
    std::fs::write(path, render_csv(header, rows))?;
    Ok(())
}

/// One named check in a run summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssertionResult {
    pub name: String,
    pub passed: bool,
    /// Human-readable value/tolerance detail, floats at 17 significant digits.
    pub detail: String,
}

impl AssertionResult {
    pub fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

/// JSON run summary: command, echoed config, assertion outcomes and wall
/// time. Wall time lives only here so the CSV artifacts stay byte-stable
/// across runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub assertions: Vec<AssertionResult>,
    pub wall_time_seconds: f64,
}

impl RunSummary {
    pub fn all_passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn write(&self, path: &Path) -> Result<(), IoError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, IoError> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Parses the flat `key = value` config format. `#` starts a comment; blank
/// lines are skipped; later keys override earlier ones.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, IoError> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(IoError::BadConfigLine {
                line: idx + 1,
                content: raw.trim().to_string(),
            });
        };
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() {
            return Err(IoError::BadConfigLine {
                line: idx + 1,
                content: raw.trim().to_string(),
            });
        }
        map.insert(key.to_string(), value.to_string());
    }
    Ok(map)
}

pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>, IoError> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}
