//! Output directory with a checksummed manifest.
//!
//! Every file goes through [`Artifacts`], which records its SHA-256 and size.
//! Nothing time- or host-dependent is written, so identical inputs give
//! byte-identical directories.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Serialize)]
struct Manifest<'a> {
    experiment: &'a str,
    preset: Option<&'a str>,
    seed: u64,
    files: &'a [ManifestEntry],
}

pub struct Artifacts {
    root: PathBuf,
    entries: Vec<ManifestEntry>,
}

impl Artifacts {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            entries: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(name);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.entries.retain(|e| e.path != name);
        self.entries.push(ManifestEntry {
            path: name.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len(),
        });
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_vec_pretty(value).map_err(|e| CliError::io(name, e.into()))?;
        text.push(b'\n');
        self.write(name, &text)
    }

    /// CSV with a header row; cells are formatted by the caller.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| CliError::io(name, std::io::Error::other(e));
        w.write_record(header).map_err(err)?;
        for row in rows {
            w.write_record(&row).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::io(name, std::io::Error::other(e.to_string())))?;
        self.write(name, &bytes)
    }

    /// CSV straight from serializable records.
    pub fn csv_records<T: Serialize>(&mut self, name: &str, records: &[T]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in records {
            w.serialize(r).map_err(|e| CliError::io(name, std::io::Error::other(e)))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::io(name, std::io::Error::other(e.to_string())))?;
        self.write(name, &bytes)
    }

    /// Writes `manifest.json` listing every artifact, sorted by path.
    pub fn finish(mut self, experiment: &str, preset: Option<&str>, seed: u64) -> Result<Vec<ManifestEntry>> {
        self.entries.sort_by(|a, b| a.path.cmp(&b.path));
        let manifest = Manifest {
            experiment,
            preset,
            seed,
            files: &self.entries,
        };
        let mut text = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::io("manifest.json", e.into()))?;
        text.push(b'\n');
        let path = self.root.join("manifest.json");
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(self.entries)
    }
}

/// Shortest round-trip formatting, used for every CSV cell. `Debug` switches
/// to exponent notation for tiny and huge values where `Display` would not.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}
