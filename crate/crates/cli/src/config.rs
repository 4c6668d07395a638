use std::path::{Path, PathBuf};

use dplab::construction::{ConstructionParams, Geometry, Terms};
use dplab::experiments::{RunSpec, SweepConfig};
use dplab::solver::SolverConfig;
use serde::{Deserialize, Serialize};

/// Everything one invocation needs. Unset optional keys take the defaults
/// of the chosen `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: u32,
    #[serde(default = "default_geometry")]
    pub geometry: Geometry,
    pub separation: Option<f64>,
    pub amplitude: Option<f64>,
    #[serde(default = "default_terms")]
    pub terms: Terms,
    pub grid_points: Option<usize>,
    #[serde(default = "default_max_band")]
    pub max_band: usize,
    #[serde(default = "default_sharpness")]
    pub sharpness: f64,

    /// Defaults to `t_final / steps`.
    pub dt: Option<f64>,
    /// Defaults to `1 / ln n`.
    pub t_final: Option<f64>,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "yes")]
    pub dealias: bool,
    #[serde(default = "default_blowup")]
    pub blowup_threshold: f64,
    /// Defaults to `0`, `t_final / 2` and `t_final`.
    pub snapshot_times: Option<Vec<f64>>,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "yes")]
    pub coupling: bool,
    #[serde(default = "yes")]
    pub diagnostics: bool,

    /// `n` values of a sweep.
    #[serde(default = "default_ns")]
    pub ns: Vec<u32>,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_verbosity")]
    pub verbosity: u8,
    /// Write field dumps of every snapshot.
    #[serde(default)]
    pub dump_fields: bool,
}

fn default_geometry() -> Geometry {
    Geometry::Reduced
}
fn default_terms() -> Terms {
    Terms::All
}
fn default_max_band() -> usize {
    dplab::experiments::inflation::DEFAULT_MAX_BAND
}
fn default_sharpness() -> f64 {
    1.0
}
fn default_steps() -> usize {
    dplab::solver::state::DEFAULT_STEPS
}
fn yes() -> bool {
    true
}
fn default_blowup() -> f64 {
    1e6
}
fn default_cfl() -> f64 {
    1.0
}
fn default_ns() -> Vec<u32> {
    vec![8, 12, 16]
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("dplab-out")
}
fn default_verbosity() -> u8 {
    1
}

/// A configuration problem, reported with exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("n = 8").expect("defaults deserialize")
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(format!("config: {}", e.message())))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn params_for(&self, n: u32) -> Result<ConstructionParams, ConfigError> {
        let mut p = ConstructionParams::new(n).map_err(|e| ConfigError(format!("n: {e}")))?;
        p.geometry = self.geometry;
        if let Some(s) = self.separation {
            p.separation = s;
        }
        if let Some(a) = self.amplitude {
            p.amplitude = a;
        }
        p.terms = self.terms;
        p.grid_points = self.grid_points;
        p.validate().map_err(|e| ConfigError(e.to_string()))?;
        Ok(p)
    }

    pub fn solver_for(&self, params: &ConstructionParams) -> Result<SolverConfig, ConfigError> {
        if self.steps == 0 {
            return Err(ConfigError("steps must be positive".into()));
        }
        let t_final = self.t_final.unwrap_or_else(|| params.t0());
        let mut s = SolverConfig::new(t_final);
        s.dt = self.dt.unwrap_or(t_final / self.steps as f64);
        s.dealias = self.dealias;
        s.blowup_threshold = self.blowup_threshold;
        s.snapshot_times = self
            .snapshot_times
            .clone()
            .unwrap_or_else(|| vec![0.0, 0.5 * t_final, t_final]);
        s.cfl = self.cfl;
        s.coupling = self.coupling;
        s.validate().map_err(|e| ConfigError(e.to_string()))?;
        Ok(s)
    }

    pub fn run_spec_for(&self, n: u32) -> Result<RunSpec, ConfigError> {
        let params = self.params_for(n)?;
        let solver = self.solver_for(&params)?;
        if !(self.sharpness.is_finite() && self.sharpness > 0.0) {
            return Err(ConfigError(format!(
                "sharpness must be positive, got {}",
                self.sharpness
            )));
        }
        Ok(RunSpec {
            params,
            solver,
            diagnostics: self.diagnostics,
            max_band: self.max_band,
            sharpness: self.sharpness,
        })
    }

    pub fn run_spec(&self) -> Result<RunSpec, ConfigError> {
        self.run_spec_for(self.n)
    }

    pub fn sweep(&self) -> Result<SweepConfig, ConfigError> {
        if self.ns.is_empty() {
            return Err(ConfigError("ns must list at least one n".into()));
        }
        let mut cfg = SweepConfig::new(self.ns.clone());
        cfg.geometry = self.geometry;
        cfg.separation = self.separation;
        cfg.steps = self.steps;
        cfg.diagnostics = self.diagnostics;
        for &n in &self.ns {
            cfg.spec(n).map_err(|e| ConfigError(format!("ns: {e}")))?;
        }
        Ok(cfg)
    }
}

/// `all`, `none` or `single:<l>`.
pub fn parse_terms(s: &str) -> Result<Terms, String> {
    match s {
        "all" => Ok(Terms::All),
        "none" => Ok(Terms::None),
        other => other
            .strip_prefix("single:")
            .and_then(|l| l.parse().ok())
            .map(Terms::Single)
            .ok_or_else(|| format!("terms must be 'all', 'none' or 'single:<l>', got '{other}'")),
    }
}
