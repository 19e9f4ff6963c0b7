//! `manifest.json`: every file written by a run, with its checksum.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::sha256_hex;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub files: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn new(config_hash: &str) -> Self {
        Manifest { config_hash: config_hash.to_string(), files: Vec::new() }
    }

    /// Records a file; a later write to the same path replaces the entry.
    pub fn add(&mut self, rel: &Path, bytes: &[u8]) {
        let path = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
        self.files.retain(|f| f.path != path);
        self.files.push(ManifestEntry { path, bytes: bytes.len() as u64, sha256: sha256_hex(bytes) });
    }

    /// Paths listed but missing or changed on disk under `root`.
    pub fn verify(&self, root: &Path) -> Vec<String> {
        self.files
            .iter()
            .filter(|f| std::fs::read(root.join(&f.path)).map(|b| sha256_hex(&b) != f.sha256).unwrap_or(true))
            .map(|f| f.path.clone())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rewrite_replaces_entry() {
        let mut m = Manifest::new("h");
        m.add(Path::new("a/b.csv"), b"1");
        m.add(Path::new("a/b.csv"), b"22");
        assert_eq!(m.files.len(), 1);
        assert_eq!(m.files[0].bytes, 2);
        assert_eq!(m.files[0].path, "a/b.csv");
    }

    #[test]
    fn verify_reports_missing() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = Manifest::new("h");
        std::fs::write(dir.path().join("x"), b"x").unwrap();
        m.add(Path::new("x"), b"x");
        m.add(Path::new("y"), b"y");
        assert_eq!(m.verify(dir.path()), vec!["y".to_string()]);
    }
}
