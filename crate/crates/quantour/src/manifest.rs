//! Run manifests embedded in every artifact: the command, the fully
//! resolved settings, and content hashes of the inputs.
//!
//! Manifests carry no wall-clock fields; artifacts must be byte-reproducible
//! from (inputs, config, seed) alone.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    /// Resolved settings, flattened to strings for stable rendering.
    pub settings: BTreeMap<String, String>,
    /// Input path → SHA-256 of its content.
    pub inputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            settings: BTreeMap::new(),
            inputs: BTreeMap::new(),
        }
    }

    pub fn setting(mut self, key: &str, value: impl ToString) -> Self {
        self.settings.insert(key.to_string(), value.to_string());
        self
    }

    pub fn input_file(mut self, path: &Path) -> Result<Self> {
        let digest = hash_file(path)?;
        self.inputs.insert(path.display().to_string(), digest);
        Ok(self)
    }
}

pub fn hash_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(hex::encode(hasher.finalize()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_is_deterministic() {
        let build = || {
            RunManifest::new("fit")
                .setting("tau", 0.25)
                .setting("seed", 42u64)
                .setting("directions", 180usize)
        };
        let a = serde_json::to_string(&build()).unwrap();
        let b = serde_json::to_string(&build()).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("\"tau\":\"0.25\""));
    }

    #[test]
    fn file_hash_tracks_content() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        std::fs::write(&p, "a,b\n1,2\n").unwrap();
        let h1 = hash_file(&p).unwrap();
        std::fs::write(&p, "a,b\n1,3\n").unwrap();
        let h2 = hash_file(&p).unwrap();
        assert_ne!(h1, h2);
        assert_eq!(h1.len(), 64);
    }
}
