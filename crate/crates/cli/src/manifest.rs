//! Run manifests: what was run, on which input, producing which files.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliResult;
use crate::table::write_text;

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
    pub version: String,
}

pub fn digest(path: &Path, bytes: &[u8]) -> InputDigest {
    InputDigest { path: path.display().to_string(), sha256: format!("{:x}", Sha256::digest(bytes)) }
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value, seed: Option<u64>) -> Self {
        Self {
            command: command.into(),
            config,
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            wall_clock_seconds: 0.0,
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    /// Writes the manifest next to `primary` (`<primary>.manifest.json`)
    /// unless an explicit path is given.
    pub fn write(mut self, primary: &Path, explicit: Option<&Path>, elapsed: Duration) -> CliResult<PathBuf> {
        self.wall_clock_seconds = elapsed.as_secs_f64();
        let path = explicit.map(Path::to_path_buf).unwrap_or_else(|| {
            let mut s = primary.as_os_str().to_owned();
            s.push(".manifest.json");
            PathBuf::from(s)
        });
        let mut text = serde_json::to_string_pretty(&self).expect("manifest serializes");
        text.push('\n');
        write_text(&path, &text)?;
        Ok(path)
    }
}
