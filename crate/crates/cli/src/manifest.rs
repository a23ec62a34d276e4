use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, Result};

pub const FORMAT_VERSION: u32 = 1;

/// Everything needed to re-run a command, written next to its outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub format_version: u32,
    pub flags: Value,
    pub outputs: Vec<PathBuf>,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
}

pub fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis())
}

impl RunManifest {
    pub fn new(command: &str, flags: &impl Serialize, started_unix_ms: u128) -> Self {
        Self {
            command: command.to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            format_version: FORMAT_VERSION,
            flags: serde_json::to_value(flags).unwrap_or(Value::Null),
            outputs: Vec::new(),
            started_unix_ms,
            finished_unix_ms: started_unix_ms,
        }
    }

    pub fn finish(mut self, outputs: Vec<PathBuf>) -> Self {
        self.outputs = outputs;
        self.finished_unix_ms = now_ms();
        self
    }

    /// `<output>.manifest.json`.
    pub fn sidecar_path(output: &Path) -> PathBuf {
        let mut p = output.as_os_str().to_owned();
        p.push(".manifest.json");
        PathBuf::from(p)
    }

    pub fn write_beside(&self, output: &Path) -> Result<()> {
        let path = Self::sidecar_path(output);
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Json { path: path.clone(), source: e })?;
        std::fs::write(&path, text + "\n").map_err(|e| CliError::io(path, e))
    }
}
