//! Run configuration: one TOML file per run, versioned by `schema_version`.

use serde::{Deserialize, Serialize};
use sfio_core::jets::{Block, MapSpec};
use sfio_core::oscillatory::QuadratureConfig;
use sfio_core::symbol_spaces::{axis, OpenSet};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema_version: u32,
    /// Base seed; `--seed` overrides it.
    pub seed: Option<u64>,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    pub grid: Option<GridConfig>,
    pub test_function: Option<GaussianConfig>,
    pub phase: Option<PhaseConfig>,
    pub amplitude: Option<AmplitudeConfig>,
    pub apply: Option<ApplyConfig>,
    pub verify: Option<VerifyConfig>,
    pub transport: Option<TransportConfig>,
    pub halfwave: Option<HalfwaveConfig>,
    pub wave: Option<WaveConfig>,
    pub mc: Option<McConfig>,
    pub converge: Option<ConvergeConfig>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, String> {
        let cfg: Config = toml::from_str(text).map_err(|e| format!("config does not match the schema: {e}"))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(format!("unsupported schema_version {} (expected {SCHEMA_VERSION})", cfg.schema_version));
        }
        Ok(cfg)
    }

    pub fn section<'a, T>(&self, name: &str, s: &'a Option<T>) -> Result<&'a T, String> {
        s.as_ref().ok_or_else(|| format!("config is missing the [{name}] section"))
    }
}

/// Output points: an explicit list or `n` equispaced points on `[lo, hi]`.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub points: Option<Vec<f64>>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub n: Option<usize>,
}

impl GridConfig {
    pub fn points(&self) -> Result<Vec<f64>, String> {
        match (&self.points, self.lo, self.hi, self.n) {
            (Some(p), None, None, None) => Ok(p.clone()),
            (None, Some(lo), Some(hi), Some(n)) if lo <= hi && n >= 1 => {
                Ok(if n == 1 { vec![lo] } else { axis(lo, hi, n) })
            }
            _ => Err("[grid] needs either `points` or all of `lo`, `hi`, `n` with lo ≤ hi and n ≥ 1".into()),
        }
    }
}

/// `scale · exp(−((y − center)/width)²)`.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianConfig {
    #[serde(default)]
    pub center: f64,
    #[serde(default = "one")]
    pub width: f64,
    #[serde(default = "one")]
    pub scale: f64,
}

impl Default for GaussianConfig {
    fn default() -> Self {
        GaussianConfig { center: 0.0, width: 1.0, scale: 1.0 }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseConfig {
    /// `[n_x, n_y, n_ξ]`.
    #[serde(default = "scalar_signature")]
    pub signature: [usize; 3],
    pub map: MapSpec,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AmplitudeConfig {
    #[serde(default = "unit_map")]
    pub map: MapSpec,
    #[serde(default)]
    pub d: f64,
    #[serde(default = "one")]
    pub rho: f64,
    #[serde(default)]
    pub delta: f64,
}

impl Default for AmplitudeConfig {
    fn default() -> Self {
        AmplitudeConfig { map: unit_map(), d: 0.0, rho: 1.0, delta: 0.0 }
    }
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ApplyConfig {
    /// Evaluate the transpose `Aᵗ` instead.
    #[serde(default)]
    pub adjoint: bool,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "two")]
    pub m: usize,
    /// Lower bound to certify; the M_α check is skipped without it.
    pub alpha: Option<f64>,
    #[serde(default = "nine")]
    pub points_per_axis: usize,
    pub x_set: Option<OpenSet>,
    pub y_set: Option<OpenSet>,
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    #[serde(default = "default_xi_samples")]
    pub xi_samples: Vec<f64>,
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            m: 2,
            alpha: None,
            points_per_axis: 9,
            x_set: None,
            y_set: None,
            lambdas: default_lambdas(),
            xi_samples: default_xi_samples(),
            radii: default_radii(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TransportConfig {
    pub speed: MapSpec,
    pub t: f64,
    pub alpha: f64,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    #[default]
    None,
    /// Dense Fourier quadrature; constant speed only.
    Spectral,
    /// Periodic grid with a split-step time integrator.
    PseudoSpectral,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct HalfwaveConfig {
    pub speed: MapSpec,
    pub t: f64,
    #[serde(default = "default_region")]
    pub region: [f64; 2],
    #[serde(default = "two_f")]
    pub horizon: f64,
    #[serde(default)]
    pub reference: Reference,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct WaveConfig {
    pub c0: f64,
    pub t: f64,
    /// Standard deviation of the global Gaussian speed; deterministic when absent.
    pub s: Option<f64>,
    /// Lower bound enforced by truncating the speed law.
    pub alpha: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub n: usize,
    #[serde(default)]
    pub pairs: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeConfig {
    #[serde(default = "default_ns")]
    pub ns: Vec<usize>,
    #[serde(default = "two")]
    pub m: usize,
    /// `a_n = a + bump/n`.
    #[serde(default = "default_bump")]
    pub bump: MapSpec,
}

fn one() -> f64 {
    1.0
}

fn two() -> usize {
    2
}

fn two_f() -> f64 {
    2.0
}

fn nine() -> usize {
    9
}

fn scalar_signature() -> [usize; 3] {
    [1, 1, 1]
}

fn unit_map() -> MapSpec {
    MapSpec::Constant { value: 1.0 }
}

fn default_lambdas() -> Vec<f64> {
    vec![0.5, 2.0, 10.0]
}

fn default_xi_samples() -> Vec<f64> {
    vec![0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0]
}

fn default_radii() -> Vec<f64> {
    vec![1.0, 4.0, 16.0]
}

fn default_region() -> [f64; 2] {
    [-3.0, 3.0]
}

fn default_ns() -> Vec<usize> {
    vec![4, 8, 16, 32, 64]
}

fn default_bump() -> MapSpec {
    MapSpec::GaussianBump { var: Block::X, index: 0, center: 0.0, width: 1.0, scale: 1.0 }
}
