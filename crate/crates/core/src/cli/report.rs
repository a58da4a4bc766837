//! Report documents: named scalars with tolerances and provenance, tables,
//! pass/fail checks and runtime stamps.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CliError;

/// Where an expected value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// A value stated in the source literature.
    Published,
    /// A value obtained from an independent computation or construction.
    Derived,
    /// A value that follows from definitions or arithmetic.
    Trivial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scalar {
    pub name: String,
    pub value: f64,
    /// `None` for values that are reported but only checked for finiteness.
    pub expected: Option<f64>,
    pub tolerance: f64,
    pub provenance: Provenance,
    pub passed: bool,
}

impl Scalar {
    /// `|value - expected| <= tolerance`.
    pub fn checked(
        name: &str,
        value: f64,
        expected: f64,
        tolerance: f64,
        provenance: Provenance,
    ) -> Self {
        Self {
            name: name.into(),
            value,
            expected: Some(expected),
            tolerance,
            provenance,
            passed: (value - expected).abs() <= tolerance,
        }
    }

    /// A reported value with the accuracy it was computed to.
    pub fn info(name: &str, value: f64, tolerance: f64, provenance: Provenance) -> Self {
        Self {
            name: name.into(),
            value,
            expected: None,
            tolerance,
            provenance,
            passed: value.is_finite(),
        }
    }
}

/// A table cell; integers, floats, booleans and text serialize untagged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    /// CSV rendering; floats use 17 significant digits.
    pub fn to_csv_field(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(v) => v.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v.into())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), CliError> {
        let io = |e: csv::Error| CliError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        };
        let mut w = csv::Writer::from_path(path).map_err(io)?;
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_csv_field))
                .map_err(io)?;
        }
        w.flush().map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Non-deterministic parts of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Stamps {
    /// RFC 3339 wall-clock time at which the report was finished.
    pub timestamp: String,
    /// Seconds spent per phase.
    pub runtimes: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub command: String,
    pub seed: u64,
    pub passed: bool,
    pub scalars: Vec<Scalar>,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    pub stamps: Stamps,
}

impl ReportDocument {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            schema_version: super::config::SCHEMA_VERSION,
            command: command.into(),
            seed,
            passed: true,
            scalars: Vec::new(),
            tables: Vec::new(),
            checks: Vec::new(),
            stamps: Stamps::default(),
        }
    }

    pub fn scalar(&mut self, s: Scalar) {
        self.passed &= s.passed;
        self.scalars.push(s);
    }

    pub fn check(&mut self, c: Check) {
        self.passed &= c.passed;
        self.checks.push(c);
    }

    pub fn table(&mut self, t: Table) {
        self.tables.push(t);
    }

    pub fn runtime(&mut self, phase: &str, seconds: f64) {
        self.stamps.runtimes.insert(phase.into(), seconds);
    }

    /// Sets the timestamp to the current time.
    pub fn stamp(&mut self) {
        self.stamps.timestamp = chrono::Utc::now().to_rfc3339();
    }

    /// Name and reason of the first failing check or scalar, checks first.
    pub fn first_failure(&self) -> Option<String> {
        if let Some(c) = self.checks.iter().find(|c| !c.passed) {
            return Some(format!("{}: {}", c.name, c.detail));
        }
        self.scalars.iter().find(|s| !s.passed).map(describe_scalar)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON with the stamps removed, for comparing runs.
    pub fn comparable_json(&self) -> String {
        let mut copy = self.clone();
        copy.stamps = Stamps::default();
        copy.to_json()
    }

    pub fn write_json(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join("report.json");
        std::fs::write(&path, self.to_json() + "\n").map_err(|e| CliError::Io {
            path,
            message: e.to_string(),
        })
    }

    /// One CSV file per table, named `<command>_<table>.csv`.
    pub fn write_csv(&self, dir: &Path) -> Result<(), CliError> {
        let prefix = self.command.replace(' ', "_");
        for t in &self.tables {
            t.write_csv(&dir.join(format!("{prefix}_{}.csv", t.name)))?;
        }
        Ok(())
    }

    /// Human-readable summary.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} (seed {})", self.command, self.seed);
        for s in &self.scalars {
            let _ = writeln!(out, "  {} {}", mark(s.passed), describe_scalar(s));
        }
        for c in &self.checks {
            let _ = writeln!(out, "  {} {}: {}", mark(c.passed), c.name, c.detail);
        }
        for t in &self.tables {
            let _ = writeln!(
                out,
                "  table {} ({} rows): {}",
                t.name,
                t.rows.len(),
                t.columns.join(", ")
            );
        }
        let _ = writeln!(
            out,
            "{}",
            if self.passed {
                "all checks passed"
            } else {
                "FAILED"
            }
        );
        out
    }
}

fn mark(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

fn describe_scalar(s: &Scalar) -> String {
    let prov = match s.provenance {
        Provenance::Published => "published",
        Provenance::Derived => "derived",
        Provenance::Trivial => "trivial",
    };
    match s.expected {
        Some(e) => format!(
            "{} = {} (expected {} ± {:e}, {prov})",
            s.name,
            number(s.value),
            number(e),
            s.tolerance
        ),
        None => format!(
            "{} = {} (± {:e}, {prov})",
            s.name,
            number(s.value),
            s.tolerance
        ),
    }
}

fn number(v: f64) -> String {
    if v != 0.0 && v.abs() < 1e-3 {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ReportDocument {
        let mut r = ReportDocument::new("demo", 1);
        r.scalar(Scalar::checked(
            "x",
            1.0,
            1.0 + 1e-9,
            1e-6,
            Provenance::Derived,
        ));
        let mut t = Table::new("t", &["n", "value", "ok", "label"]);
        t.push(vec![3u32.into(), 0.1.into(), true.into(), "a,b".into()]);
        r.table(t);
        r.check(Check::new("c", true, "fine"));
        r
    }

    #[test]
    fn scalar_tolerance_and_failure() {
        assert!(Scalar::checked("a", 1.0, 1.1, 0.2, Provenance::Trivial).passed);
        assert!(!Scalar::checked("a", 1.0, 1.3, 0.2, Provenance::Trivial).passed);
        assert!(!Scalar::checked("a", f64::NAN, 1.0, 0.2, Provenance::Trivial).passed);
        assert!(!Scalar::info("a", f64::INFINITY, 0.0, Provenance::Derived).passed);
    }

    #[test]
    fn first_failure_prefers_checks() {
        let mut r = sample();
        assert!(r.passed && r.first_failure().is_none());
        r.scalar(Scalar::checked(
            "bad scalar",
            0.0,
            1.0,
            0.1,
            Provenance::Trivial,
        ));
        assert!(r.first_failure().unwrap().starts_with("bad scalar"));
        r.check(Check::new("bad check", false, "why"));
        assert_eq!(r.first_failure().unwrap(), "bad check: why");
        assert!(!r.passed);
    }

    #[test]
    fn json_round_trip_and_stamps_excluded() {
        let mut a = sample();
        let b = a.clone();
        a.stamp();
        a.runtime("phase", 0.5);
        let back: ReportDocument = serde_json::from_str(&a.to_json()).unwrap();
        assert_eq!(back, a);
        assert_eq!(a.comparable_json(), b.comparable_json());
    }

    #[test]
    fn csv_uses_full_precision() {
        let dir = tempfile::tempdir().unwrap();
        sample().write_csv(dir.path()).unwrap();
        let text = std::fs::read_to_string(dir.path().join("demo_t.csv")).unwrap();
        assert_eq!(
            text,
            "n,value,ok,label\n3,1.0000000000000001e-1,true,\"a,b\"\n"
        );
        let parsed: f64 = "1.0000000000000001e-1".parse().unwrap();
        assert_eq!(parsed, 0.1);
    }
}
