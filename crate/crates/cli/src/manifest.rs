use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to rerun a command from its output directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// SHA-256 of the effective config in canonical (sorted-key) JSON.
    pub config_hash: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub threads: usize,
    pub started_unix: f64,
    #[serde(default)]
    pub finished_unix: Option<f64>,
    pub status: String,
    #[serde(default)]
    pub outputs: Vec<OutputFile>,
}

fn now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn config_hash(config: &serde_json::Value) -> String {
    // serde_json maps are ordered by key, so this is canonical
    sha256_hex(config.to_string().as_bytes())
}

/// If `value` is a manifest, the config it recorded; otherwise `value`.
pub fn unwrap_config(value: serde_json::Value) -> serde_json::Value {
    match value {
        serde_json::Value::Object(mut map) if map.contains_key("config_hash") && map.contains_key("config") => {
            map.remove("config").unwrap_or_default()
        }
        other => other,
    }
}

pub struct Run {
    dir: PathBuf,
    manifest: RunManifest,
}

impl Run {
    /// Creates the directory and writes the manifest before any result.
    pub fn start(dir: &Path, command: &str, config: serde_json::Value, seed: u64) -> Result<Run> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config_hash: config_hash(&config),
            config,
            seed,
            threads: rayon::current_num_threads(),
            started_unix: now(),
            finished_unix: None,
            status: "running".into(),
            outputs: Vec::new(),
        };
        let run = Run {
            dir: dir.to_path_buf(),
            manifest,
        };
        run.write()?;
        Ok(run)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Reference block embedded in JSON results.
    pub fn reference(&self) -> serde_json::Value {
        serde_json::json!({ "file": MANIFEST_FILE, "config_hash": self.manifest.config_hash })
    }

    /// Writes `bytes` to `name` inside the run directory and records it.
    pub fn output(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.record(name, bytes);
        Ok(path)
    }

    fn record(&mut self, name: &str, bytes: &[u8]) {
        self.manifest.outputs.push(OutputFile {
            path: name.into(),
            sha256: sha256_hex(bytes),
        });
    }

    pub fn finish(mut self, status: &str) -> Result<()> {
        self.manifest.finished_unix = Some(now());
        self.manifest.status = status.into();
        self.write()
    }

    fn write(&self) -> Result<()> {
        let tmp = self.dir.join(format!(".{MANIFEST_FILE}.tmp"));
        fs::write(&tmp, serde_json::to_vec_pretty(&self.manifest)?)?;
        fs::rename(&tmp, self.dir.join(MANIFEST_FILE))?;
        Ok(())
    }
}
