use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::fd_solver::Grid;
use crate::problem_model::CATALOG_RADIUS;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyKind {
    LapZero,
    LapHelmholtz,
    KToZero,
    Decay,
    Flux,
    Kernels,
}

impl StudyKind {
    pub const ALL: [StudyKind; 6] = [
        StudyKind::LapZero,
        StudyKind::LapHelmholtz,
        StudyKind::KToZero,
        StudyKind::Decay,
        StudyKind::Flux,
        StudyKind::Kernels,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StudyKind::LapZero => "lap-zero",
            StudyKind::LapHelmholtz => "lap-helmholtz",
            StudyKind::KToZero => "k-to-zero",
            StudyKind::Decay => "decay",
            StudyKind::Flux => "flux",
            StudyKind::Kernels => "kernels",
        }
    }
}

impl fmt::Display for StudyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StudyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StudyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown study '{s}'")))
    }
}

/// Tolerances used when the configuration does not override them.
pub fn default_tolerances() -> BTreeMap<String, f64> {
    [
        ("cauchy", 1e-3),
        ("flux", 1e-3),
        ("decay-zero-energy", 0.15),
        ("decay-helmholtz", 0.1),
        ("bound-ratio", 2.0),
        ("representation", 0.01),
        ("oracle", 0.02),
        ("log-blowup", 0.1),
        ("k-to-zero", 5e-3),
        ("radiation-exponent", 1.0),
        ("incoming-exponent", 0.5),
        ("zero-mean", 1e-8),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// Everything a study needs. Parsed from flat `key = value` text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub problem: String,
    pub study: StudyKind,
    /// Half width `L` of the computational square.
    pub half_width: f64,
    /// Nodes per side.
    pub n: usize,
    pub eps_ladder: Vec<f64>,
    pub k_ladder: Vec<f64>,
    /// Wave number of the fixed-`k` Helmholtz study.
    pub k: f64,
    pub b: f64,
    /// Midpoint step for source quadratures and the convolution oracle.
    pub quadrature_step: f64,
    pub tolerances: BTreeMap<String, f64>,
    pub out_dir: PathBuf,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            problem: "identity-dipole".into(),
            study: StudyKind::LapZero,
            half_width: 8.0 * CATALOG_RADIUS,
            n: 513,
            eps_ladder: (0..8).map(|j| 0.1 / 4f64.powi(j)).collect(),
            k_ladder: vec![0.5, 0.25, 0.125, 0.0625],
            k: 1.0,
            b: 2.0,
            quadrature_step: 0.01,
            tolerances: default_tolerances(),
            out_dir: PathBuf::from("lap2d-out"),
        }
    }
}

impl StudyConfig {
    /// Parse `key = value` lines; `#` starts a comment, lists are
    /// comma-separated, `tol.<name> = value` overrides one tolerance.
    /// Keys not given keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = StudyConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Set one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "problem" => self.problem = value.to_string(),
            "study" => self.study = value.parse()?,
            "L" | "half_width" => self.half_width = number(key, value)?,
            "n" => {
                self.n = value
                    .parse()
                    .map_err(|_| Error::Config(format!("{key}: '{value}' is not a count")))?
            }
            "eps_ladder" => self.eps_ladder = list(key, value)?,
            "k_ladder" => self.k_ladder = list(key, value)?,
            "k" => self.k = number(key, value)?,
            "b" => self.b = number(key, value)?,
            "quadrature_step" => self.quadrature_step = number(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            _ => match key.strip_prefix("tol.") {
                Some(name) if self.tolerances.contains_key(name) => {
                    self.tolerances.insert(name.to_string(), number(key, value)?);
                }
                _ => return Err(Error::Config(format!("unknown key '{key}'"))),
            },
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        Grid::new(self.half_width, self.n)?;
        if self.half_width < 4.0 * CATALOG_RADIUS {
            return Err(Error::Config(format!(
                "L = {} is below 4R = {}",
                self.half_width,
                4.0 * CATALOG_RADIUS
            )));
        }
        for (name, ladder) in [("eps_ladder", &self.eps_ladder), ("k_ladder", &self.k_ladder)] {
            if ladder.is_empty() {
                return Err(Error::Config(format!("{name} is empty")));
            }
            if ladder.iter().any(|&v| !(v > 0.0) || !v.is_finite())
                || ladder.windows(2).any(|w| !(w[1] < w[0]))
            {
                return Err(Error::Config(format!(
                    "{name} must be positive and strictly decreasing: {ladder:?}"
                )));
            }
        }
        if !(self.k > 0.0) || !self.k.is_finite() {
            return Err(Error::Config(format!("k must be positive, got {}", self.k)));
        }
        if !(self.b > 1.0) || !self.b.is_finite() {
            return Err(Error::Config(format!("b must exceed 1, got {}", self.b)));
        }
        if !(self.quadrature_step > 0.0) {
            return Err(Error::Config(format!(
                "quadrature_step must be positive, got {}",
                self.quadrature_step
            )));
        }
        if let Some((name, v)) = self.tolerances.iter().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::Config(format!("tolerance {name} must be positive, got {v}")));
        }
        Ok(())
    }

    pub fn tol(&self, name: &str) -> f64 {
        self.tolerances
            .get(name)
            .copied()
            .or_else(|| default_tolerances().get(name).copied())
            .unwrap_or_else(|| panic!("no tolerance named {name}"))
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.half_width, self.n)
    }
}

fn number(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Config(format!("{key}: '{value}' is not a number")))
}

fn list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| number(key, s))
        .collect()
}
