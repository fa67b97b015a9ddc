//! JSON run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use rdrestore_core::{GridGeometry, KernelSpec, ModelParams, NoiseSpec, SolverConfig, StopRule};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub tau: f64,
    pub h: f64,
    pub tol: f64,
    #[serde(rename = "maxIter")]
    pub max_iter: usize,
    pub stop_rule: StopRule,
    pub enforce_cfl: bool,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            tau: 0.5,
            h: 1.0,
            tol: 0.005,
            max_iter: 500,
            stop_rule: StopRule::SuccessiveChange,
            enforce_cfl: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IoSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
    /// JSON sidecar/summary path; defaults to `<output>.json`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<PathBuf>,
    /// Clean image used to score the input and the result.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<PathBuf>,
}

/// Complete settings of one experiment. The defaults are the published
/// parameter set (τ = 0.5, α = 0.9, γ = 1, μ = 0.4, k1 = 1, λ1 = 0.9,
/// maxIter = 500, tol = 0.005).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelParams,
    pub solver: SolverSection,
    pub kernel: KernelSpec,
    pub noise: NoiseSpec,
    #[serde(default)]
    pub io: IoSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelParams::default(),
            solver: SolverSection::default(),
            kernel: KernelSpec::Disk { radius: 3.0 },
            noise: NoiseSpec { sigma: 3.0, seed: 0 },
            io: IoSection::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Applies `section.key=value` overrides. Values are parsed as JSON and
    /// fall back to plain strings.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Self, CliError> {
        if overrides.is_empty() {
            return Ok(self.clone());
        }
        let mut root = serde_json::to_value(self).expect("config serializes");
        for entry in overrides {
            let entry = entry.as_ref();
            let (path, raw) = entry
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("override `{entry}` is not key=value")))?;
            let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
            let mut node = &mut root;
            let keys: Vec<&str> = path.split('.').collect();
            for (depth, key) in keys.iter().enumerate() {
                let obj = node
                    .as_object_mut()
                    .ok_or_else(|| CliError::Config(format!("`{path}` does not name a config field")))?;
                if depth + 1 == keys.len() {
                    obj.insert(key.to_string(), value.clone());
                    break;
                }
                node = obj
                    .entry(key.to_string())
                    .or_insert_with(|| Value::Object(Default::default()));
            }
        }
        serde_json::from_value(root).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn solver_config(&self) -> Result<SolverConfig, CliError> {
        let config = SolverConfig {
            params: self.model,
            geometry: GridGeometry {
                h: self.solver.h,
                tau: self.solver.tau,
            },
            tol: self.solver.tol,
            max_iter: self.solver.max_iter,
            stop_rule: self.solver.stop_rule,
            enforce_cfl: self.solver.enforce_cfl,
            ..Default::default()
        };
        config.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(config)
    }
}
