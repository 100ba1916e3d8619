use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    /// Relative to the run directory.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub artifact_version: String,
    pub stages: Vec<StageTiming>,
    pub outputs: Vec<OutputFile>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl RunManifest {
    pub fn describe(dir: &Path, relative: &str) -> Result<OutputFile> {
        let full = dir.join(relative);
        Ok(OutputFile {
            path: relative.to_owned(),
            bytes: std::fs::metadata(&full)?.len(),
            sha256: sha256_file(&full)?,
        })
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        super::output::write_json(&dir.join(MANIFEST_FILE), self)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(dir.join(MANIFEST_FILE))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("manifest: {e}")))
    }

    /// Recompute every digest; lists the files that no longer match.
    pub fn verify(&self, dir: &Path) -> Result<()> {
        let mut bad = Vec::new();
        for f in &self.outputs {
            match sha256_file(&dir.join(&f.path)) {
                Ok(d) if d == f.sha256 => {}
                _ => bad.push(f.path.clone()),
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(format!("digest mismatch: {}", bad.join(", "))))
        }
    }
}
