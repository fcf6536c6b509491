use std::fs;
use std::path::{Path, PathBuf};

use qru_core::dataio::format_real;

use crate::error::{CliError, CliResult};

/// Writes through a sibling temp file and renames, so readers never see a half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        CliError::data(format!("cannot write {}: {e}", path.display()))
    })
}

/// Refuses to start if an output's directory does not exist.
pub fn check_writable(path: &Path) -> CliResult<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => {
            Err(CliError::usage(format!("output directory {} does not exist", dir.display())))
        }
        _ => Ok(()),
    }
}

/// In-memory CSV body; cells are plain tokens or numbers.
pub struct Table {
    text: String,
    width: usize,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { text: format!("{}\n", header.join(",")), width: header.len() }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.width);
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        write_atomic(path, self.text.as_bytes())
    }
}

pub fn num(v: f64) -> String {
    format_real(v)
}
