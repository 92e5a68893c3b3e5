use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{StudyConfig, StudyKind};
use crate::analysis::{ConvergenceLadder, DecayFit};
use crate::Result;

/// Acceptance region for a check value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Target {
    AtMost { limit: f64 },
    AtLeast { limit: f64 },
    Within { center: f64, tolerance: f64 },
}

impl Target {
    pub fn at_most(limit: f64) -> Self {
        Target::AtMost { limit }
    }

    pub fn at_least(limit: f64) -> Self {
        Target::AtLeast { limit }
    }

    pub fn within(center: f64, tolerance: f64) -> Self {
        Target::Within { center, tolerance }
    }

    /// NaN never passes.
    pub fn accepts(&self, value: f64) -> bool {
        match *self {
            Target::AtMost { limit } => value <= limit,
            Target::AtLeast { limit } => value >= limit,
            Target::Within { center, tolerance } => (value - center).abs() <= tolerance,
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            Target::AtMost { limit } => format!("<= {limit:e}"),
            Target::AtLeast { limit } => format!(">= {limit:e}"),
            Target::Within { center, tolerance } => format!("= {center} +- {tolerance}"),
        }
    }
}

/// A pass/fail verdict with the numeric it was derived from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub target: Target,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, target: Target) -> Self {
        Self {
            name: name.into(),
            value,
            passed: target.accepts(value),
            target,
            detail: String::new(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    /// One human-readable line, `PASS`/`FAIL` first.
    pub fn line(&self) -> String {
        let mut s = format!(
            "{} {}: {:.6e} (target {})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.target.describe()
        );
        if !self.detail.is_empty() {
            s.push_str(" -- ");
            s.push_str(&self.detail);
        }
        s
    }
}

/// A flat numeric table, exported as CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedLadder {
    pub name: String,
    pub ladder: ConvergenceLadder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedFit {
    pub name: String,
    pub fit: DecayFit,
}

/// Everything a study computed. Deterministic for a fixed configuration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Numerics {
    pub scalars: BTreeMap<String, f64>,
    pub ladders: Vec<NamedLadder>,
    pub fits: Vec<NamedFit>,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    pub flags: Vec<String>,
}

impl Numerics {
    pub fn scalar(&mut self, name: &str, value: f64) {
        self.scalars.insert(name.to_string(), value);
    }

    pub fn check(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn find_check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveTiming {
    pub label: String,
    pub seconds: f64,
    pub outer_iterations: usize,
}

/// Wall-clock data, kept apart from the numerics so reports can be compared
/// bit for bit.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub solves: Vec<SolveTiming>,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub study: StudyKind,
    pub problem: String,
    pub config: StudyConfig,
    pub notes: Vec<String>,
    pub numerics: Numerics,
    pub timing: Timing,
}

impl StudyReport {
    pub fn passed(&self) -> bool {
        self.numerics.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.numerics.checks.iter().filter(|c| !c.passed)
    }

    pub fn stem(&self) -> String {
        format!("{}-{}", self.study, self.problem)
    }

    /// Write `<stem>.json` and one `<stem>-<table>.csv` per table into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let json = dir.join(format!("{}.json", self.stem()));
        serde_json::to_writer_pretty(std::io::BufWriter::new(std::fs::File::create(&json)?), self)?;
        written.push(json);
        for table in &self.numerics.tables {
            let path = dir.join(format!("{}-{}.csv", self.stem(), table.name));
            table.write_csv(std::io::BufWriter::new(std::fs::File::create(&path)?))?;
            written.push(path);
        }
        Ok(written)
    }

    /// Bit-exact serialization of the numerics, for reproducibility checks.
    pub fn numerics_fingerprint(&self) -> String {
        serde_json::to_string(&self.numerics).expect("numerics serialize")
    }
}
