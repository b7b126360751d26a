//! Run manifests: what a command ran with, recorded next to its output.
//!
//! A manifest pins the tool version, the resolved configuration hash, the
//! seed, the command-line parameters, and content hashes of every input.
//! Two runs with identical manifests produce identical outputs, except
//! for wall-clock timing fields. Manifests deliberately contain no
//! timestamps and no filesystem paths, so the same run in a different
//! directory yields the same bytes.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "run_manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    /// `latticelearn <version>`.
    pub tool: String,
    /// Subcommand name.
    pub command: String,
    /// Hash of the resolved configuration (defaults + file + flags).
    pub config_hash: String,
    pub seed: Option<u64>,
    /// Flag values beyond the seed, stringified.
    pub parameters: BTreeMap<String, String>,
    /// Role -> content hash of each input file or directory.
    pub input_hashes: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str, config_hash: &str, seed: Option<u64>) -> Self {
        RunManifest {
            tool: format!("latticelearn {}", env!("CARGO_PKG_VERSION")),
            command: command.to_string(),
            config_hash: config_hash.to_string(),
            seed,
            parameters: BTreeMap::new(),
            input_hashes: BTreeMap::new(),
        }
    }

    pub fn parameter(mut self, key: &str, value: impl std::fmt::Display) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    /// Record `path` (file or directory) under `role`.
    pub fn input(mut self, role: &str, path: &Path) -> Result<Self> {
        let hash = if path.is_dir() {
            hash_tree(path)?
        } else {
            hash_file(path)?
        };
        self.input_hashes.insert(role.to_string(), hash);
        Ok(self)
    }

    /// Write `run_manifest.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::File(dir.display().to_string(), e))?;
        self.write_to(&dir.join(MANIFEST_FILE))
    }

    /// Write the manifest to an explicit path; used for file outputs,
    /// which get a sibling `<name>.manifest.json` so several outputs can
    /// share a directory without clobbering each other's manifests.
    pub fn write_to(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json).map_err(|e| Error::File(path.display().to_string(), e))
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Error::File(path.display().to_string(), e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn hex16(digest: &[u8]) -> String {
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// First sixteen hex characters of the SHA-256 of `bytes`.
pub fn hash_bytes(bytes: &[u8]) -> String {
    hex16(&Sha256::digest(bytes))
}

pub fn hash_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::File(path.display().to_string(), e))?;
    Ok(hash_bytes(&bytes))
}

/// Hash a directory: the hash of `name=filehash` lines over all files,
/// relative paths, sorted. Only contents matter, not location on disk.
pub fn hash_tree(root: &Path) -> Result<String> {
    fn walk(root: &Path, dir: &Path, lines: &mut Vec<String>) -> Result<()> {
        let mut entries: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| Error::File(dir.display().to_string(), e))?
            .collect::<std::io::Result<_>>()?;
        entries.sort_by_key(|e| e.file_name());
        for entry in entries {
            let path = entry.path();
            if path.is_dir() {
                walk(root, &path, lines)?;
            } else {
                let rel = path
                    .strip_prefix(root)
                    .expect("walk stays under root")
                    .to_string_lossy()
                    .replace('\\', "/");
                lines.push(format!("{rel}={}", hash_file(&path)?));
            }
        }
        Ok(())
    }
    let mut lines = Vec::new();
    walk(root, root, &mut lines)?;
    Ok(hash_bytes(lines.join("\n").as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trips_and_is_path_free() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("input.json"), b"{}").unwrap();
        let m = RunManifest::new("learn", "deadbeefdeadbeef", Some(7))
            .parameter("lambda", 0.311)
            .input("dense", &dir.path().join("input.json"))
            .unwrap();
        m.write(dir.path()).unwrap();
        assert_eq!(RunManifest::read(dir.path()).unwrap(), m);
        let text = std::fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap();
        assert!(
            !text.contains(&dir.path().display().to_string()),
            "manifests must not embed filesystem paths"
        );
        assert!(text.contains("\"lambda\": \"0.311\""));
    }

    #[test]
    fn tree_hash_ignores_location_but_not_content() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        for d in [a.path(), b.path()] {
            std::fs::create_dir(d.join("sub")).unwrap();
            std::fs::write(d.join("x.csv"), b"1,2\n").unwrap();
            std::fs::write(d.join("sub/y.csv"), b"3,4\n").unwrap();
        }
        assert_eq!(hash_tree(a.path()).unwrap(), hash_tree(b.path()).unwrap());
        std::fs::write(b.path().join("x.csv"), b"1,9\n").unwrap();
        assert_ne!(hash_tree(a.path()).unwrap(), hash_tree(b.path()).unwrap());
    }

    #[test]
    fn file_and_byte_hashes_agree() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f");
        std::fs::write(&path, b"abc").unwrap();
        assert_eq!(hash_file(&path).unwrap(), hash_bytes(b"abc"));
        assert_eq!(hash_bytes(b"abc").len(), 16);
    }
}
