//! Experiment configuration. TOML is the primary encoding; JSON with the same
//! schema is accepted for files ending in `.json`.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::profiles::ProfileSpec;
use crate::error::{Error, Result};
use crate::flow::FlowConfig;
use crate::galerkin::GalerkinConfig;
use crate::linearized::LinearConfig;
use crate::state::{io::load_field, make_grid, BoundaryMode, Grid, SphereField, UNIT_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Evolve,
    Compat,
    Linearized,
    Galerkin,
    Convergence,
    EpsSweep,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Evolve => "evolve",
            ExperimentKind::Compat => "compat",
            ExperimentKind::Linearized => "linearized",
            ExperimentKind::Galerkin => "galerkin",
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::EpsSweep => "eps_sweep",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub extents: Vec<f64>,
    pub points: Vec<usize>,
    #[serde(default = "default_mode")]
    pub mode: BoundaryMode,
}

fn default_mode() -> BoundaryMode {
    BoundaryMode::NeumannMirror
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        make_grid(self.dim, &self.extents, &self.points, self.mode)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompatSpec {
    pub order: usize,
    /// Defaults to the resolution-matched tolerance.
    pub tol: Option<f64>,
}

impl Default for CompatSpec {
    fn default() -> Self {
        CompatSpec { order: 2, tol: None }
    }
}

/// Order of the linearized problem plus its solver settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearizedSpec {
    pub k: usize,
    pub epsilon: f64,
    pub record_every: usize,
    pub source_scale: f64,
}

impl Default for LinearizedSpec {
    fn default() -> Self {
        let c = LinearConfig::default();
        LinearizedSpec { k: 1, epsilon: c.epsilon, record_every: c.record_every, source_scale: c.source_scale }
    }
}

impl LinearizedSpec {
    pub fn solver_config(&self) -> LinearConfig {
        LinearConfig {
            epsilon: self.epsilon,
            record_every: self.record_every,
            source_scale: self.source_scale,
            defect: true,
        }
    }
}

/// Helical-wave refinement study on a periodic line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceSpec {
    pub extent: f64,
    pub k_mode: usize,
    pub alpha: f64,
    /// Spatial study: grids at a fixed small `dt`.
    pub points: Vec<usize>,
    pub dt: f64,
    pub t_end: f64,
    /// Temporal study: step sizes on a coarse grid.
    pub time_points: usize,
    pub dts: Vec<f64>,
    pub time_t_end: f64,
}

impl Default for ConvergenceSpec {
    fn default() -> Self {
        ConvergenceSpec {
            extent: 2.0 * PI,
            k_mode: 1,
            alpha: PI / 3.0,
            points: vec![64, 128, 256],
            dt: 1e-4,
            t_end: 0.5,
            time_points: 16,
            dts: vec![0.04, 0.02, 0.01],
            time_t_end: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub eps: Vec<f64>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec { eps: vec![0.2, 0.1, 0.05, 0.025] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    /// Required by every kind except `convergence`.
    #[serde(default)]
    pub grid: Option<GridSpec>,
    /// Named initial data; mutually exclusive with `initial_file`.
    #[serde(default)]
    pub profile: Option<ProfileSpec>,
    #[serde(default)]
    pub initial_file: Option<PathBuf>,
    #[serde(default)]
    pub flow: FlowConfig,
    #[serde(default)]
    pub compat: CompatSpec,
    #[serde(default)]
    pub linearized: LinearizedSpec,
    #[serde(default)]
    pub galerkin: GalerkinConfig,
    #[serde(default)]
    pub convergence: ConvergenceSpec,
    #[serde(default)]
    pub sweep: SweepSpec,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads and validates a config; relative `initial_file` paths resolve
    /// against the config's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json(&text),
            _ => Self::from_toml(&text),
        }
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if let (Some(f), Some(dir)) = (&cfg.initial_file, path.parent()) {
            if f.is_relative() {
                cfg.initial_file = Some(dir.join(f));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == ExperimentKind::Convergence {
            return Ok(());
        }
        self.grid
            .as_ref()
            .ok_or_else(|| Error::Config(format!("kind `{}` requires a [grid] section", self.kind.as_str())))?
            .build()
            .map_err(|e| Error::Config(format!("grid: {e}")))?;
        match (&self.profile, &self.initial_file) {
            (Some(_), Some(_)) => Err(Error::Config("give either [profile] or initial_file, not both".into())),
            (None, None) => Err(Error::Config("missing initial data: [profile] or initial_file".into())),
            (None, Some(f)) if !f.exists() => {
                Err(Error::Config(format!("initial_file: {} does not exist", f.display())))
            }
            _ => Ok(()),
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        self.grid
            .as_ref()
            .ok_or_else(|| Error::Config("missing [grid]".into()))?
            .build()
    }

    pub fn initial(&self, grid: &Grid) -> Result<SphereField> {
        match (&self.profile, &self.initial_file) {
            (Some(p), None) => {
                // an unseeded random profile draws from the experiment seed
                let mut p = p.clone();
                if p.name == "random_smooth" {
                    p.params.entry("seed".into()).or_insert(self.seed as f64);
                }
                p.build(grid)
            }
            (None, Some(path)) => {
                let f = load_field(path)?;
                if !f.grid().compatible(grid) {
                    return Err(Error::Config(format!(
                        "initial_file: {} does not live on the configured grid",
                        path.display()
                    )));
                }
                SphereField::with_tol(f, UNIT_TOL)
            }
            _ => Err(Error::Config("exactly one of [profile] and initial_file is required".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
kind = "evolve"
seed = 7

[grid]
dim = 1
extents = [3.141592653589793]
points = [65]

[profile]
name = "equatorial_cos"
params = { a = 0.3 }

[flow]
epsilon = 0.1
dt = 1e-4
t_end = 0.01
"#;

    #[test]
    fn toml_and_json_agree() {
        let a = ExperimentConfig::from_toml(SAMPLE).unwrap();
        a.validate().unwrap();
        assert_eq!(a.flow.epsilon, 0.1);
        assert_eq!(a.compat, CompatSpec::default());
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(ExperimentConfig::from_json(&json).unwrap(), a);
        assert_eq!(ExperimentConfig::from_toml(&a.to_toml().unwrap()).unwrap(), a);
    }

    #[test]
    fn errors_name_the_location() {
        let bad = SAMPLE.replace("epsilon = 0.1", "epsilon = \"x\"");
        let e = ExperimentConfig::from_toml(&bad).unwrap_err().to_string();
        assert!(e.contains("line 15") && e.contains("epsilon"), "{e}");
        let bad = SAMPLE.replace("dt = 1e-4", "dtt = 1e-4");
        let e = ExperimentConfig::from_toml(&bad).unwrap_err().to_string();
        assert!(e.contains("dtt"), "{e}");
        let e = ExperimentConfig::from_json("{\"kind\": \"evolve\",\n \"seed\": -1}").unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
    }

    #[test]
    fn initial_data_rules() {
        let mut c = ExperimentConfig::from_toml(SAMPLE).unwrap();
        c.initial_file = Some("/nonexistent/field.bin".into());
        assert!(c.validate().is_err());
        c.profile = None;
        assert!(c.validate().unwrap_err().to_string().contains("does not exist"));
        c.initial_file = None;
        assert!(c.validate().is_err());
        c.kind = ExperimentKind::Convergence;
        c.grid = None;
        c.validate().unwrap();
    }
}
