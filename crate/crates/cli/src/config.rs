use std::path::{Path, PathBuf};

use portgen::{
    BoundaryMode, FieldProfiles, GeneratorPath, Material, Mesh, PortSeries, PortSignal, Profile,
    RunSettings, Scheme,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const CONFIG_SCHEMA: &str = "portgen.run/1";

fn default_schema() -> String {
    CONFIG_SCHEMA.to_string()
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub a: f64,
    pub b: f64,
    pub n_cells: usize,
    pub periodic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortSample {
    pub t: f64,
    pub left: [f64; 3],
    pub right: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryConfig {
    #[default]
    IsolatedPeriodic,
    SelfTrace,
    Prescribed { series: Vec<PortSample> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    #[serde(default)]
    pub scheme: Scheme,
    pub dt: f64,
    pub t_final: f64,
    /// Defaults to `t_final`.
    #[serde(default)]
    pub output_interval: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub n_states: usize,
    pub n_cells: Vec<usize>,
    pub gibbs_duhem_points: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            n_states: 20,
            n_cells: vec![8, 32],
            gibbs_duhem_points: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeConfig {
    pub levels: Vec<usize>,
    pub t_final: f64,
    /// RK4 step as a multiple of the cell size.
    pub cfl: f64,
}

impl Default for ConvergeConfig {
    fn default() -> Self {
        ConvergeConfig {
            levels: vec![32, 64, 128],
            t_final: 0.1,
            cfl: 0.1,
        }
    }
}

/// Fault injection for exercising the verification suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TestHooks {
    /// Negates the density-momentum block of `J` only, breaking skewness.
    #[serde(default)]
    pub flip_j_sign: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_schema")]
    pub schema: String,
    pub mesh: MeshConfig,
    #[serde(default)]
    pub material: Material,
    pub initial: FieldProfiles,
    #[serde(default)]
    pub boundary: BoundaryConfig,
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub generator: GeneratorPath,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub converge: ConvergeConfig,
    #[serde(default)]
    pub test_hooks: TestHooks,
}

impl Default for RunConfig {
    /// Smooth periodic heat-conducting gas at rest with a density bump.
    fn default() -> Self {
        RunConfig {
            schema: default_schema(),
            mesh: MeshConfig {
                a: 0.0,
                b: 1.0,
                n_cells: 32,
                periodic: true,
            },
            material: Material::default().with_transport(0.01, 0.0, 0.0),
            initial: FieldProfiles::new(
                Profile::sine(1.0, 0.2, 1.0),
                Profile::sine(0.0, 0.1, 1.0),
                Profile::cosine(1.0, 0.1, 1.0),
            ),
            boundary: BoundaryConfig::IsolatedPeriodic,
            integrator: IntegratorConfig {
                scheme: Scheme::ImplicitMidpoint,
                dt: 1e-3,
                t_final: 0.1,
                output_interval: Some(0.05),
            },
            generator: GeneratorPath::TwoGenerator,
            output_dir: default_output_dir(),
            seed: 0,
            verify: VerifyConfig::default(),
            converge: ConvergeConfig::default(),
            test_hooks: TestHooks::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("config does not match schema: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.schema != CONFIG_SCHEMA {
            return Err(CliError::Config(format!(
                "unsupported schema '{}', expected '{CONFIG_SCHEMA}'",
                self.schema
            )));
        }
        self.material.validate()?;
        self.initial.validate()?;
        self.mesh()?;
        self.settings().validate()?;
        if self.generator == GeneratorPath::SingleGenerator && !self.material.is_inviscid() {
            return Err(CliError::Config(
                "single_generator requires eta = zeta = 0".into(),
            ));
        }
        match (&self.boundary, self.mesh.periodic) {
            (BoundaryConfig::IsolatedPeriodic, false) => {
                return Err(CliError::Config(
                    "isolated_periodic boundary needs a periodic mesh".into(),
                ))
            }
            (BoundaryConfig::SelfTrace | BoundaryConfig::Prescribed { .. }, true) => {
                return Err(CliError::Config(
                    "a periodic mesh admits no port inputs".into(),
                ))
            }
            _ => {}
        }
        self.boundary_mode()?;
        if self.verify.n_cells.iter().any(|&n| n < 2) {
            return Err(CliError::Config("verify.n_cells entries must be >= 2".into()));
        }
        Ok(())
    }

    pub fn mesh(&self) -> CliResult<Mesh> {
        let m = &self.mesh;
        Ok(Mesh::new(m.a, m.b, m.n_cells, m.periodic)?)
    }

    pub fn settings(&self) -> RunSettings {
        let i = &self.integrator;
        RunSettings {
            scheme: i.scheme,
            dt: i.dt,
            t_final: i.t_final,
            output_interval: i.output_interval.unwrap_or(i.t_final),
        }
    }

    pub fn boundary_mode(&self) -> CliResult<BoundaryMode> {
        Ok(match &self.boundary {
            BoundaryConfig::IsolatedPeriodic => BoundaryMode::IsolatedPeriodic,
            BoundaryConfig::SelfTrace => BoundaryMode::SelfTrace,
            BoundaryConfig::Prescribed { series } => BoundaryMode::Prescribed(PortSeries::new(
                series
                    .iter()
                    .map(|s| (s.t, PortSignal::new(s.left, s.right)))
                    .collect(),
            )?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let cfg = RunConfig::default();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
    }

    #[test]
    fn minimal_document_uses_defaults() {
        let cfg = RunConfig::from_json(
            r#"{
                "mesh": {"a": 0, "b": 1, "n_cells": 8, "periodic": true},
                "initial": {
                    "rho": {"kind": "uniform", "value": 1},
                    "m": {"kind": "uniform", "value": 0},
                    "u": {"kind": "gaussian", "base": 1, "amplitude": 0.1, "center": 0.5, "width": 0.1}
                },
                "integrator": {"dt": 0.01, "t_final": 0.1}
            }"#,
        )
        .unwrap();
        assert_eq!(cfg.material, Material::default());
        assert_eq!(cfg.settings().output_interval, 0.1);
        assert_eq!(cfg.integrator.scheme, Scheme::ImplicitMidpoint);
    }

    fn with(f: impl FnOnce(&mut RunConfig)) -> CliResult<()> {
        let mut cfg = RunConfig::default();
        f(&mut cfg);
        cfg.validate()
    }

    #[test]
    fn rejects_inconsistent_documents() {
        assert!(with(|c| c.material.zeta = -1.0).is_err());
        assert!(with(|c| c.schema = "other/1".into()).is_err());
        assert!(with(|c| c.boundary = BoundaryConfig::SelfTrace).is_err());
        assert!(with(|c| c.mesh.periodic = false).is_err());
        assert!(with(|c| {
            c.generator = GeneratorPath::SingleGenerator;
            c.material.eta = 0.1;
        })
        .is_err());
        assert!(with(|c| {
            c.mesh.periodic = false;
            c.boundary = BoundaryConfig::Prescribed { series: vec![] };
        })
        .is_err());
        assert!(RunConfig::from_json(r#"{"mesh": 1}"#).is_err());
    }
}
