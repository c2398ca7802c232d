use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stredalab::model::{Boundary, Geometry};
use stredalab::{HamiltonianSpec, WindowParams};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(rename = "B_start")]
    pub b_start: f64,
    #[serde(rename = "B_end")]
    pub b_end: f64,
    pub steps: usize,
}

impl SweepConfig {
    /// Field values in ascending order.
    pub fn grid(&self) -> Vec<f64> {
        let (lo, hi) = if self.b_start <= self.b_end { (self.b_start, self.b_end) } else { (self.b_end, self.b_start) };
        let n = self.steps;
        (0..n)
            .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
            .collect()
    }
}

/// Settings of the `oracle` verb.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    /// Dimensions of the random brute-force instances, cycled over seeds.
    pub brute_dims: Vec<usize>,
    pub brute_instances: usize,
    /// Twist/momentum grid side of the Fukui–Hatsugai evaluations.
    pub fhs_grid: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { brute_dims: vec![20, 50, 100, 150, 200], brute_instances: 20, fhs_grid: 6 }
    }
}

fn default_nodes() -> usize {
    128
}

fn default_delta_b() -> f64 {
    stredalab::response::DEFAULT_DELTA_B
}

fn default_digits() -> usize {
    12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: HamiltonianSpec,
    pub fermi_energy: f64,
    #[serde(default = "default_nodes")]
    pub contour_nodes: usize,
    #[serde(default)]
    pub window: WindowParams,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(rename = "delta_B", default = "default_delta_b")]
    pub delta_b: f64,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub cache: bool,
    #[serde(default = "default_digits")]
    pub precision_digits: usize,
    #[serde(default)]
    pub oracle: OracleConfig,
}

fn invalid(key: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{key}: {reason}"))
}

impl RunConfig {
    /// Reads and parses `path`. Relative `output_dir` values are taken
    /// relative to the config file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| invalid("config", format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig = toml::from_str(&text).map_err(|e| invalid("config", e.to_string().trim_end()))?;
        if cfg.output_dir.is_relative() {
            if let Some(parent) = path.parent() {
                cfg.output_dir = parent.join(&cfg.output_dir);
            }
        }
        Ok(cfg)
    }

    /// Every check that does not need a diagonalization. `run` and `sweep`
    /// call this before any heavy work starts.
    pub fn validate(&self, need_sweep: bool) -> Result<(), CliError> {
        self.model.validate().map_err(|e| invalid("model", e))?;
        if self.model.boundary != Boundary::Dirichlet {
            return Err(invalid("model.boundary", "field derivatives need an open sample; use \"dirichlet\""));
        }
        if self.model.b1 != self.model.b2 {
            return Err(invalid("model.B1", format!("must equal model.B2 (got {} and {})", self.model.b1, self.model.b2)));
        }
        if !self.fermi_energy.is_finite() {
            return Err(invalid("fermi_energy", "must be finite"));
        }
        if self.contour_nodes < 8 {
            return Err(invalid("contour_nodes", format!("must be >= 8, got {}", self.contour_nodes)));
        }
        if !(self.delta_b > 0.0) || !self.delta_b.is_finite() {
            return Err(invalid("delta_B", format!("must be finite and > 0, got {}", self.delta_b)));
        }
        if !(1..=17).contains(&self.precision_digits) {
            return Err(invalid("precision_digits", format!("must be in 1..=17, got {}", self.precision_digits)));
        }
        match &self.sweep {
            Some(s) => {
                if s.steps < 2 {
                    return Err(invalid("sweep.steps", format!("must be >= 2, got {}", s.steps)));
                }
                if !s.b_start.is_finite() || !s.b_end.is_finite() {
                    return Err(invalid("sweep.B_start", "sweep bounds must be finite"));
                }
            }
            None if need_sweep => return Err(invalid("sweep", "missing [sweep] table")),
            None => {}
        }
        if self.oracle.fhs_grid < 6 {
            return Err(invalid("oracle.fhs_grid", format!("must be >= 6, got {}", self.oracle.fhs_grid)));
        }
        if let Some(&d) = self.oracle.brute_dims.iter().find(|&&d| d < 2 || d > stredalab::oracle::MAX_BRUTE_DIM) {
            return Err(invalid("oracle.brute_dims", format!("dimensions must lie in 2..={}, got {d}", stredalab::oracle::MAX_BRUTE_DIM)));
        }
        if self.oracle.brute_instances > 0 && self.oracle.brute_dims.is_empty() {
            return Err(invalid("oracle.brute_dims", "empty while brute_instances > 0"));
        }
        let geometry = std::sync::Arc::new(Geometry::from_spec(&self.model));
        self.window.resolve(&geometry).map_err(|e| invalid("window", e))?;
        check_writable(&self.output_dir)
    }

    pub fn cache_dir(&self) -> PathBuf {
        self.output_dir.join("cache")
    }
}

fn check_writable(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| invalid("output_dir", format!("{}: {e}", dir.display())))?;
    let probe = dir.join(".stredalab-write-probe");
    fs::write(&probe, b"").map_err(|e| invalid("output_dir", format!("{} is not writable: {e}", dir.display())))?;
    let _ = fs::remove_file(probe);
    Ok(())
}
