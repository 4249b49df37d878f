//! Atomic artifact writes with a per-command provenance record.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use graphnas_core::generators::write_atomic;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::Failure;

pub const PROVENANCE_DIR: &str = "provenance";
pub const EFFECTIVE_MANIFEST: &str = "manifest.effective.toml";

/// `provenance/<command>.json`: which manifest produced which files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub command: String,
    pub manifest_sha256: String,
    pub seed: u64,
    /// Output-relative path to SHA-256 of the bytes written.
    pub artifacts: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Collects the artifacts one command writes under `root`.
pub struct Recorder {
    root: PathBuf,
    command: &'static str,
    written: BTreeMap<String, String>,
}

impl Recorder {
    pub fn new(root: &Path, command: &'static str) -> Result<Self, Failure> {
        fs::create_dir_all(root).map_err(|e| Failure::from(e).context(format!("creating {}", root.display())))?;
        Ok(Recorder {
            root: root.to_path_buf(),
            command,
            written: BTreeMap::new(),
        })
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    /// Writes `bytes` to `rel` (creating parent directories) and records it.
    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<(), Failure> {
        let path = self.path(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        write_atomic(&path, bytes).map_err(|e| Failure::from(e).context(format!("writing {}", path.display())))?;
        self.written.insert(rel.to_string(), sha256_hex(bytes));
        Ok(())
    }

    /// Renders with `f` into memory, then writes atomically.
    pub fn write_with(
        &mut self,
        rel: &str,
        f: impl FnOnce(&mut Vec<u8>) -> graphnas_core::Result<()>,
    ) -> Result<(), Failure> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write(rel, &buf)
    }

    /// Records a file some other writer already put in place.
    pub fn record_existing(&mut self, rel: &str) -> Result<(), Failure> {
        let bytes = fs::read(self.path(rel))?;
        self.written.insert(rel.to_string(), sha256_hex(&bytes));
        Ok(())
    }

    /// Writes the effective manifest and `provenance/<command>.json`.
    pub fn finish(mut self, manifest_text: &str, manifest_sha256: &str, seed: u64) -> Result<(), Failure> {
        self.write(EFFECTIVE_MANIFEST, manifest_text.as_bytes())?;
        self.written.remove(EFFECTIVE_MANIFEST);
        let record = Provenance {
            command: self.command.to_string(),
            manifest_sha256: manifest_sha256.to_string(),
            seed,
            artifacts: std::mem::take(&mut self.written),
        };
        let json = serde_json::to_string_pretty(&record).map_err(|e| Failure::internal(e.to_string()))?;
        let rel = format!("{PROVENANCE_DIR}/{}.json", self.command);
        self.write(&rel, format!("{json}\n").as_bytes())
    }
}
