//! TOML run configuration.
//!
//! ```toml
//! experiment = "offset_cylinder"   # or "manufactured"
//! scheme = "cnle"                  # or "be"
//! dt = 0.01
//! t_final = 3.0
//!
//! [mesh]
//! n_outer = 80                     # offset cylinder
//! n_inner = 60
//! n_per_side = 64                  # manufactured solution
//!
//! [params]
//! nu = 1e-4
//! c_s = 0.1
//! mu = 0.4
//! # delta = 0.01                   # defaults to the shortest mesh edge
//!
//! [solver]
//! type = "direct"                  # or "iterative"
//! tol = 1e-10
//! max_iter = 5000
//!
//! [output]
//! diagnostics = "diagnostics.csv"
//! convergence = "convergence.csv"
//! vtk_prefix = "flow"
//! every_n_steps = 100              # VTK snapshot period, 0 for none
//! snapshot_times = [3.0]
//!
//! [convergence]
//! dt_list = [0.04, 0.02, 0.01, 0.005]
//! ```

use std::path::{Path, PathBuf};

use msm_core::linsolve::{GmresIlu, LinearSolver, DEFAULT_TOL};
use msm_core::stepper::Scheme;
use serde::Deserialize;

use crate::direct::DirectSolver;
use crate::experiments::{CylinderSetup, ModelSettings};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid configuration: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    OffsetCylinder,
    Manufactured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Direct,
    Iterative,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(rename = "type", default = "default_kind")]
    pub kind: SolverKind,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_kind() -> SolverKind {
    SolverKind::Direct
}
fn default_tol() -> f64 {
    DEFAULT_TOL
}
fn default_max_iter() -> usize {
    5000
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { kind: default_kind(), tol: default_tol(), max_iter: default_max_iter() }
    }
}

impl SolverConfig {
    pub fn build(&self) -> Box<dyn LinearSolver + Send> {
        match self.kind {
            SolverKind::Direct => Box::new(DirectSolver::new(self.tol)),
            SolverKind::Iterative => Box::new(GmresIlu::new(self.tol, self.max_iter)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    #[serde(default = "default_n_outer")]
    pub n_outer: usize,
    #[serde(default = "default_n_inner")]
    pub n_inner: usize,
    #[serde(default = "default_n_per_side")]
    pub n_per_side: usize,
}

fn default_n_outer() -> usize {
    80
}
fn default_n_inner() -> usize {
    60
}
fn default_n_per_side() -> usize {
    64
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self { n_outer: default_n_outer(), n_inner: default_n_inner(), n_per_side: default_n_per_side() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub nu: f64,
    #[serde(default = "default_c_s")]
    pub c_s: f64,
    #[serde(default = "default_mu")]
    pub mu: f64,
    pub delta: Option<f64>,
}

fn default_c_s() -> f64 {
    0.1
}
fn default_mu() -> f64 {
    0.4
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub diagnostics: Option<PathBuf>,
    pub convergence: Option<PathBuf>,
    pub vtk_prefix: Option<PathBuf>,
    #[serde(default)]
    pub every_n_steps: usize,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceConfig {
    #[serde(default)]
    pub dt_list: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub scheme: String,
    #[serde(default)]
    pub dt: Option<f64>,
    pub t_final: f64,
    #[serde(default = "default_true")]
    pub forcing: bool,
    #[serde(default)]
    pub mesh: MeshConfig,
    pub params: ParamsConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub convergence: ConvergenceConfig,
}

fn default_true() -> bool {
    true
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        Self::from_toml(&text)
    }

    pub fn scheme(&self) -> Scheme {
        Scheme::parse(&self.scheme).expect("validated")
    }

    pub fn settings(&self) -> ModelSettings {
        ModelSettings { nu: self.params.nu, c_s: self.params.c_s, mu: self.params.mu, delta: self.params.delta }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if Scheme::parse(&self.scheme).is_none() {
            return bad(format!("unknown scheme `{}` (expected `be` or `cnle`)", self.scheme));
        }
        if !(self.t_final > 0.0) {
            return bad(format!("t_final must be positive, got {}", self.t_final));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return bad(format!("dt must be positive, got {dt}"));
            }
        }
        if !(self.solver.tol > 0.0) {
            return bad(format!("solver.tol must be positive, got {}", self.solver.tol));
        }
        for (name, v) in [("nu", Some(self.params.nu)), ("c_s", Some(self.params.c_s)), ("mu", Some(self.params.mu)), ("delta", self.params.delta)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return bad(format!("params.{name} must be finite and positive, got {v}"));
                }
            }
        }
        Ok(())
    }

    /// Offset-cylinder setup; requires `dt`.
    pub fn cylinder_setup(&self) -> Result<CylinderSetup, ConfigError> {
        let dt = self.dt.ok_or_else(|| ConfigError::Invalid("`dt` is required for a run".into()))?;
        let mut snapshot_times = self.output.snapshot_times.clone();
        if self.output.every_n_steps > 0 {
            let steps = (self.t_final / dt).round() as usize;
            snapshot_times.extend((0..=steps).step_by(self.output.every_n_steps).map(|s| s as f64 * dt));
        }
        Ok(CylinderSetup {
            scheme: self.scheme(),
            n_outer: self.mesh.n_outer,
            n_inner: self.mesh.n_inner,
            dt,
            t_final: self.t_final,
            settings: self.settings(),
            forcing: self.forcing,
            snapshot_times,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
experiment = "offset_cylinder"
scheme = "cnle"
dt = 0.01
t_final = 3.0

[mesh]
n_outer = 80
n_inner = 60

[params]
nu = 1e-4
mu = 0.3

[solver]
type = "iterative"
tol = 1e-9

[output]
diagnostics = "d.csv"
every_n_steps = 100
"#;

    #[test]
    fn parses_example() {
        let cfg = RunConfig::from_toml(EXAMPLE).unwrap();
        assert_eq!(cfg.experiment, Experiment::OffsetCylinder);
        assert_eq!(cfg.scheme(), Scheme::Cnle);
        assert_eq!(cfg.params.c_s, 0.1);
        assert_eq!(cfg.params.mu, 0.3);
        assert_eq!(cfg.params.delta, None);
        assert_eq!(cfg.solver.kind, SolverKind::Iterative);
        let setup = cfg.cylinder_setup().unwrap();
        assert_eq!(setup.snapshot_times.len(), 4);
        assert!(setup.forcing);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(RunConfig::from_toml(&EXAMPLE.replace("cnle", "rk4")).is_err());
        assert!(RunConfig::from_toml(&EXAMPLE.replace("nu = 1e-4", "nu = -1.0")).is_err());
        assert!(RunConfig::from_toml(&EXAMPLE.replace("[mesh]", "[mesh]\nbogus = 1")).is_err());
    }
}
