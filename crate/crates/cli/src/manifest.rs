//! Output directory bookkeeping and the JSON run manifest.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Clone, Debug, Serialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Files written by one invocation, each hashed as it is written.
#[derive(Debug)]
pub struct RunDir {
    root: PathBuf,
    records: Vec<OutputRecord>,
    timings: Vec<(String, f64)>,
    started: f64,
    clock: Instant,
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

fn io_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

impl RunDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root).map_err(|e| io_err(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            records: Vec::new(),
            timings: Vec::new(),
            started: unix_now(),
            clock: Instant::now(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.root.join(name);
        std::fs::write(&path, bytes).map_err(|e| io_err(&path, e))?;
        self.records.retain(|r| r.file != name);
        self.records.push(OutputRecord {
            file: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(path)
    }

    /// Runs `f` and records its wall time under `label`.
    pub fn timed<R>(&mut self, label: &str, f: impl FnOnce(&mut Self) -> R) -> R {
        let t0 = Instant::now();
        let out = f(self);
        self.timings.push((label.to_string(), t0.elapsed().as_secs_f64()));
        out
    }

    pub fn records(&self) -> &[OutputRecord] {
        &self.records
    }

    /// Writes `manifest.json` and returns its content.
    pub fn finish(
        &mut self,
        command: &str,
        config: &Value,
        status: &str,
        flags: &[String],
        results: Value,
    ) -> Result<Value, CliError> {
        let timings: serde_json::Map<String, Value> = self
            .timings
            .iter()
            .map(|(k, v)| (k.clone(), json!(v)))
            .collect();
        let manifest = json!({
            "tool": "squeezeprep",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "status": status,
            "units": { "rates": "g", "times": "1/g" },
            "started_unix": self.started,
            "finished_unix": unix_now(),
            "wall_seconds": self.clock.elapsed().as_secs_f64(),
            "timings_seconds": timings,
            "flags": flags,
            "config": config,
            "results": results,
            "outputs": self.records,
        });
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        let path = self.root.join(MANIFEST_NAME);
        std::fs::write(&path, text + "\n").map_err(|e| io_err(&path, e))?;
        Ok(manifest)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
