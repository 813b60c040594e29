use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use bigan_core::{ModelShape, TrainingConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetHashes {
    pub train_normal: String,
    pub test: String,
}

/// Everything needed to repeat a training run and check the result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config: TrainingConfig,
    pub shape: ModelShape,
    pub threshold: f64,
    pub seed: u64,
    pub data_dir: PathBuf,
    pub dataset_sha256: DatasetHashes,
    pub checkpoint: PathBuf,
    pub checkpoint_sha256: String,
    pub loss_trace: PathBuf,
    pub report: Option<PathBuf>,
    pub roc: Option<PathBuf>,
    pub duration_secs: f64,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read manifest {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("malformed manifest {}", path.display()))
    }
}
