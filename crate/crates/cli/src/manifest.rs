//! Run manifests: every command writes `<command>.manifest.json` into the
//! output directory before any result file, then finalizes it with stage
//! timings and the inventory of files it emitted. Timings are the one
//! non-deterministic output of the pipeline.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use plangr_core::error::Result;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub engine_version: String,
    pub command: String,
    /// SHA-256 of the canonical config JSON.
    pub config_hash: String,
    /// SHA-256 per lexicon source, when the command uses one.
    pub lexicon_hashes: BTreeMap<String, String>,
    pub timings_ms: BTreeMap<String, f64>,
    /// Every file this command wrote, relative paths as recorded.
    pub outputs: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

/// Collects outputs and timings for one command invocation.
pub struct ManifestWriter {
    path: PathBuf,
    manifest: RunManifest,
}

impl ManifestWriter {
    /// Create the manifest file up front, before any result is written.
    pub fn begin(output_dir: &Path, command: &str, config_json: &str) -> Result<Self> {
        std::fs::create_dir_all(output_dir)?;
        let path = output_dir.join(format!("{command}.manifest.json"));
        let writer = Self {
            path,
            manifest: RunManifest {
                engine_version: env!("CARGO_PKG_VERSION").to_string(),
                command: command.to_string(),
                config_hash: sha256_hex(config_json.as_bytes()),
                lexicon_hashes: BTreeMap::new(),
                timings_ms: BTreeMap::new(),
                outputs: Vec::new(),
            },
        };
        writer.flush()?;
        Ok(writer)
    }

    pub fn add_lexicon_hash(&mut self, name: &str, content: &[u8]) {
        self.manifest
            .lexicon_hashes
            .insert(name.to_string(), sha256_hex(content));
    }

    pub fn record_output(&mut self, path: &Path) {
        self.manifest.outputs.push(path.display().to_string());
    }

    /// Run a stage closure, recording its wall-clock duration.
    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f()?;
        self.manifest
            .timings_ms
            .insert(stage.to_string(), start.elapsed().as_secs_f64() * 1e3);
        Ok(out)
    }

    pub fn finalize(mut self) -> Result<RunManifest> {
        self.manifest.outputs.sort();
        self.flush()?;
        Ok(self.manifest)
    }

    fn flush(&self) -> Result<()> {
        let json = serde_json::to_string_pretty(&self.manifest)?;
        std::fs::write(&self.path, json + "\n")?;
        Ok(())
    }
}
