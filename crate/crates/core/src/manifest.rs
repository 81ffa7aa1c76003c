//! Run manifests: the config, seeds, and input digests behind an artifact.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::EvalError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub dataset_digest: Option<String>,
    pub providers: Vec<String>,
    pub created_at: String,
}

impl RunManifest {
    pub fn new(
        command: &str,
        config: serde_json::Value,
        seed: u64,
        dataset_digest: Option<String>,
        providers: Vec<String>,
    ) -> Self {
        Self {
            command: command.to_string(),
            config,
            seed,
            dataset_digest,
            providers,
            created_at: chrono::Utc::now().to_rfc3339(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), EvalError> {
        let io_err = |source: std::io::Error| EvalError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut file = File::create(path).map_err(io_err)?;
        let json = serde_json::to_string_pretty(self).expect("serialize manifest");
        file.write_all(json.as_bytes()).map_err(io_err)?;
        file.write_all(b"\n").map_err(io_err)
    }
}

/// Hex SHA-256 of a file's bytes.
pub fn file_digest(path: &Path) -> Result<String, EvalError> {
    let bytes = std::fs::read(path).map_err(|source| EvalError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(bytes_digest(&bytes))
}

pub fn bytes_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_recomputable() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f");
        std::fs::write(&path, b"hello").unwrap();
        assert_eq!(file_digest(&path).unwrap(), file_digest(&path).unwrap());
        assert_eq!(file_digest(&path).unwrap(), bytes_digest(b"hello"));
    }

    #[test]
    fn manifest_round_trips() {
        let manifest = RunManifest::new(
            "eval",
            serde_json::json!({"epochs": 15}),
            7,
            Some("abc".into()),
            vec!["hash-embedder".into()],
        );
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.json");
        manifest.write(&path).unwrap();
        let loaded: RunManifest =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(loaded, manifest);
    }
}
