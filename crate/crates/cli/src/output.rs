//! Exit-code classification, artifact writing and the run manifest.

use serde::Serialize;
use sfio_core::oscillatory::QuadratureConfig;
use sfio_core::regularizer::KappaPlan;
use std::fmt;
use std::path::{Path, PathBuf};

/// A failed run, classified by exit code.
#[derive(Debug)]
pub enum CliError {
    Io(String),
    Config(String),
    Numerical(String),
    Check(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Check(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(m) => write!(f, "i/o: {m}"),
            CliError::Config(m) => write!(f, "config: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Check(m) => write!(f, "check failed: {m}"),
        }
    }
}

pub fn config_err(e: impl fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

pub fn numerical(e: impl fmt::Display) -> CliError {
    CliError::Numerical(e.to_string())
}

#[derive(Debug, Default, Serialize)]
pub struct Achieved {
    /// Largest per-point quadrature error estimate over the written fields.
    pub max_estimate: Option<f64>,
    pub converged: Option<bool>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub schema_version: u32,
    pub config_path: String,
    /// SHA-256 of the config bytes.
    pub config_sha256: String,
    pub seed: Option<u64>,
    pub workers: usize,
    pub kappa_plan: Option<KappaPlan>,
    pub quadrature: Option<QuadratureConfig>,
    pub achieved: Achieved,
    /// Not reproducible; excluded from artifact comparisons.
    pub wall_time_s: f64,
    pub artifacts: Vec<String>,
    pub rerun: String,
}

/// Writes artifacts under the output directory and remembers their relative paths.
pub struct Artifacts {
    root: PathBuf,
    pub written: Vec<String>,
}

impl Artifacts {
    pub fn new(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root).map_err(|e| CliError::Io(format!("{}: {e}", root.display())))?;
        Ok(Artifacts { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn write(&mut self, rel: &str, body: &str) -> Result<(), CliError> {
        let path = self.root.join(rel);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        }
        std::fs::write(&path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.written.push(rel.to_string());
        Ok(())
    }

    pub fn write_manifest(&self, m: &Manifest) -> Result<(), CliError> {
        let path = self.root.join("manifest.json");
        let body = serde_json::to_string_pretty(m).expect("manifest serializes");
        std::fs::write(&path, body + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }
}

/// `x,re,im` rows for reference values.
pub fn complex_csv(xs: &[f64], vals: impl IntoIterator<Item = (f64, f64)>) -> String {
    let mut s = String::from("x,re,im\n");
    for (x, (re, im)) in xs.iter().zip(vals) {
        s.push_str(&format!("{x},{re},{im}\n"));
    }
    s
}

pub fn complex_json(xs: &[f64], vals: impl IntoIterator<Item = (f64, f64)>) -> String {
    let rows: Vec<serde_json::Value> =
        xs.iter().zip(vals).map(|(x, (re, im))| serde_json::json!({"x": x, "re": re, "im": im})).collect();
    serde_json::to_string_pretty(&rows).expect("rows serialize")
}
