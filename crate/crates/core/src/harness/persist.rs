//! Versioned JSON model files.
//!
//! A file carries a magic string and a format version ahead of the payload so
//! that a wrong or stale file is rejected before any model is built.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::Standardizer;
use crate::error::{Error, Result};
use crate::graph_reduce::{PathTrace, PolicyModel};
use crate::harness::config::ExperimentConfig;
use crate::subset::SensorSubset;

pub const MAGIC: &str = "BUDGET-DAG-MODEL";
pub const FORMAT_VERSION: u32 = 1;

/// A trained policy with everything needed to score raw rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub magic: String,
    pub format_version: u32,
    pub config: ExperimentConfig,
    /// Cost multiplier the policy was trained under.
    pub delta: f64,
    pub num_classes: usize,
    /// Subsets chosen by greedy selection, in slot order; absent for full DAGs.
    pub selected_subsets: Option<Vec<SensorSubset>>,
    pub standardizer: Standardizer,
    pub model: PolicyModel,
}

impl ModelFile {
    pub fn new(
        config: ExperimentConfig,
        delta: f64,
        num_classes: usize,
        selected_subsets: Option<Vec<SensorSubset>>,
        standardizer: Standardizer,
        model: PolicyModel,
    ) -> Self {
        ModelFile {
            magic: MAGIC.into(),
            format_version: FORMAT_VERSION,
            config,
            delta,
            num_classes,
            selected_subsets,
            standardizer,
            model,
        }
    }

    /// Standardizes a raw row and runs the policy on it.
    pub fn infer_raw(&self, raw: &[f64]) -> Result<PathTrace> {
        self.model.infer(&self.standardizer.transform(raw)?)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Training(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::CorruptModel(e.to_string()))?;
        if value.get("magic").and_then(|m| m.as_str()) != Some(MAGIC) {
            return Err(Error::CorruptModel("missing magic string".into()));
        }
        let version = value
            .get("format_version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| Error::CorruptModel("missing format version".into()))?;
        if version != u64::from(FORMAT_VERSION) {
            return Err(Error::IncompatibleModel {
                found: u32::try_from(version).unwrap_or(u32::MAX),
                expected: FORMAT_VERSION,
            });
        }
        serde_json::from_value(value).map_err(|e| Error::CorruptModel(e.to_string()))
    }

    /// Writes through a temporary file in the same directory, then renames.
    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json()?.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Loads a model and checks it was trained in the mode `config` asks for.
    pub fn load_for(path: &Path, config: &ExperimentConfig) -> Result<Self> {
        let m = Self::load(path)?;
        if m.config.mode.name() != config.mode.name() {
            return Err(Error::ConfigMismatch(format!(
                "model was trained in {} mode, config asks for {}",
                m.config.mode.name(),
                config.mode.name()
            )));
        }
        Ok(m)
    }
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = path.file_name().map(|n| n.to_string_lossy()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let write = || -> std::io::Result<()> {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        Error::io(path, e)
    })
}
