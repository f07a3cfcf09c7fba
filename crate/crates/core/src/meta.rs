//! Content hashing for run metadata and increment coupling checks.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Result, SnsError};

/// SHA-256 over `"blob <len>\0" || bytes`, the object-id layout git uses.
#[derive(Clone)]
pub struct BlobHasher {
    inner: Sha256,
    expected: u64,
    seen: u64,
}

impl BlobHasher {
    pub fn new(len: u64) -> Self {
        let mut inner = Sha256::new();
        inner.update(format!("blob {len}\0").as_bytes());
        Self {
            inner,
            expected: len,
            seen: 0,
        }
    }

    pub fn update(&mut self, bytes: &[u8]) {
        self.seen += bytes.len() as u64;
        self.inner.update(bytes);
    }

    pub fn update_f64s(&mut self, values: &[f64]) {
        for v in values {
            self.update(&v.to_le_bytes());
        }
    }

    /// Hex digest. Panics in debug builds if the byte count disagrees with
    /// the declared length.
    pub fn finish(self) -> String {
        debug_assert_eq!(self.seen, self.expected, "blob length mismatch");
        hex::encode(self.inner.finalize())
    }

    /// Digest of whatever has been fed so far, with the declared header.
    pub fn finish_partial(self) -> String {
        hex::encode(self.inner.finalize())
    }
}

pub fn blob_hash(bytes: &[u8]) -> String {
    let mut h = BlobHasher::new(bytes.len() as u64);
    h.update(bytes);
    h.finish()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputFile {
    pub path: PathBuf,
    pub hash: String,
}

/// Contents of `run-meta.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub command: String,
    pub version: String,
    /// Fully resolved configuration, defaults filled in.
    pub config: Value,
    /// Values computed before the run that enter every output, such as
    /// calibrated constants and default exponents.
    pub resolved: Value,
    pub inputs: Vec<InputFile>,
    /// Blob hash of the canonical JSON of `config`, `resolved` and `inputs`.
    pub inputs_hash: String,
}

impl RunMeta {
    pub fn new(command: &str, config: &impl Serialize, resolved: Value, files: &[PathBuf]) -> Result<Self> {
        let inputs = files
            .iter()
            .map(|p| {
                let bytes = std::fs::read(p)
                    .map_err(|e| SnsError::InvalidConfig(format!("cannot read {}: {e}", p.display())))?;
                Ok(InputFile {
                    path: p.clone(),
                    hash: blob_hash(&bytes),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let config = serde_json::to_value(config)?;
        let canonical = serde_json::to_vec(&(&config, &resolved, &inputs))?;
        Ok(Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            resolved,
            inputs,
            inputs_hash: blob_hash(&canonical),
        })
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        std::fs::write(dir.join("run-meta.json"), bytes)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_git_object_id_layout() {
        // `printf 'hello\n' | git hash-object --object-format=sha256 --stdin`
        assert_eq!(
            blob_hash(b"hello\n"),
            "2cf8d83d9ee29543b34a87727421fdecb7e3f3a183d337639025de576db9ebb4"
        );
    }

    #[test]
    fn meta_hash_tracks_config_and_files() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("v0.bin");
        std::fs::write(&f, b"abc").unwrap();
        let a = RunMeta::new("simulate", &serde_json::json!({"N": 8}), Value::Null, &[f.clone()]).unwrap();
        let b = RunMeta::new("simulate", &serde_json::json!({"N": 8}), Value::Null, &[f.clone()]).unwrap();
        assert_eq!(a, b);
        std::fs::write(&f, b"abd").unwrap();
        let c = RunMeta::new("simulate", &serde_json::json!({"N": 8}), Value::Null, &[f]).unwrap();
        assert_ne!(a.inputs_hash, c.inputs_hash);
        a.write(dir.path()).unwrap();
        let back: RunMeta = serde_json::from_slice(&std::fs::read(dir.path().join("run-meta.json")).unwrap()).unwrap();
        assert_eq!(back, a);
    }
}
