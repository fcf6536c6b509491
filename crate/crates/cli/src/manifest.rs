use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};
use crate::output::write_atomic;

/// Provenance record stored next to a command's primary output.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub config: Value,
    pub started: String,
    pub finished: Option<String>,
    pub outputs: Vec<String>,
    /// Command-specific results that do not belong in the CSV body (timings, fit residuals, best trial).
    pub summary: Value,
    #[serde(skip)]
    path: PathBuf,
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// `<out>.manifest.json`
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

impl RunManifest {
    /// Records the run and writes the manifest before any result exists.
    pub fn begin(command: &str, seed: u64, config: Value, outputs: &[&Path]) -> CliResult<Self> {
        let primary = outputs.first().ok_or_else(|| CliError::usage("no output path"))?;
        let m = Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config,
            started: now(),
            finished: None,
            outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
            summary: Value::Null,
            path: manifest_path(primary),
        };
        m.write()?;
        Ok(m)
    }

    pub fn finish(mut self, summary: Value) -> CliResult<()> {
        self.summary = summary;
        self.finished = Some(now());
        self.write()
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn write(&self) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| CliError::data(e.to_string()))?;
        text.push('\n');
        write_atomic(&self.path, text.as_bytes())
    }
}
