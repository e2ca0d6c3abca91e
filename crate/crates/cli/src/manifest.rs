//! Run manifests: one JSON file next to each primary artifact recording
//! what produced it. Manifests carry wall-clock duration and are the only
//! artifact allowed to differ between identical runs.

use std::path::{Path, PathBuf};
use std::time::Instant;

use quantcheck_core::classify::stable_hash;
use quantcheck_core::config::PipelineConfig;
use quantcheck_core::{Error, Result};
use serde::Serialize;

#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub inputs: Vec<InputDigest>,
    pub artifact: PathBuf,
    pub duration_ms: u128,
}

#[derive(Serialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub digest: String,
}

pub struct ManifestBuilder {
    command: String,
    config_hash: String,
    seed: u64,
    inputs: Vec<InputDigest>,
    started: Instant,
}

impl ManifestBuilder {
    pub fn start(command: &str, config: &PipelineConfig) -> Self {
        ManifestBuilder {
            command: command.to_string(),
            config_hash: config.content_hash(),
            seed: config.seed,
            inputs: Vec::new(),
            started: Instant::now(),
        }
    }

    /// Record an input file's content digest. Missing inputs are the
    /// caller's error to surface; this only digests what exists.
    pub fn input(&mut self, path: &Path) -> Result<&mut Self> {
        let bytes = std::fs::read(path)
            .map_err(|e| Error::data(format!("cannot read input {}: {e}", path.display())))?;
        self.inputs.push(InputDigest {
            path: path.to_path_buf(),
            digest: format!("{:016x}", stable_hash(&bytes)),
        });
        Ok(self)
    }

    /// Write `<artifact>.manifest.json`.
    pub fn finish(self, artifact: &Path) -> Result<()> {
        let manifest = RunManifest {
            command: self.command,
            config_hash: self.config_hash,
            seed: self.seed,
            inputs: self.inputs,
            artifact: artifact.to_path_buf(),
            duration_ms: self.started.elapsed().as_millis(),
        };
        let mut name = artifact
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "artifact".to_string());
        name.push_str(".manifest.json");
        let path = artifact.with_file_name(name);
        let json =
            serde_json::to_string_pretty(&manifest).map_err(|e| Error::data(e.to_string()))?;
        std::fs::write(path, json + "\n")?;
        Ok(())
    }
}
