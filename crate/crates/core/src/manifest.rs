//! Run manifests: what a command was asked to do and which exact inputs it
//! read, written before the command produces any output.

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::write_json;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    /// Effective settings after merging the config file and flags.
    pub config: serde_json::Value,
    /// Digests keyed by input role (e.g. `captions`, `lexicon`).
    pub inputs: BTreeMap<String, InputDigest>,
    /// Seconds since the Unix epoch.
    pub started_at: u64,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, seed: Option<u64>, config: serde_json::Value) -> Self {
        RunManifest {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config,
            inputs: BTreeMap::new(),
            started_at: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    /// Record the digest of an input file under `role`.
    pub fn add_input(&mut self, role: impl Into<String>, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let digest = digest_file(path)?;
        self.inputs.insert(role.into(), digest);
        Ok(())
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        write_json(path.as_ref(), self)
    }

    /// Re-hash every input and report the roles whose contents changed.
    pub fn verify(&self) -> Result<Vec<String>> {
        let mut changed = Vec::new();
        for (role, d) in &self.inputs {
            if digest_file(&d.path)?.sha256 != d.sha256 {
                changed.push(role.clone());
            }
        }
        Ok(changed)
    }
}

pub fn digest_file(path: &Path) -> Result<InputDigest> {
    let mut file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    let mut bytes = 0u64;
    loop {
        let n = file.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
        bytes += n as u64;
    }
    Ok(InputDigest {
        path: path.to_path_buf(),
        sha256: hex::encode(hasher.finalize()),
        bytes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_known_content() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("abc.txt");
        fs::write(&p, "abc").unwrap();
        let d = digest_file(&p).unwrap();
        assert_eq!(
            d.sha256,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        assert_eq!(d.bytes, 3);
    }

    #[test]
    fn verify_detects_changes() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("in.txt");
        fs::write(&p, "one").unwrap();
        let mut m = RunManifest::new("test", Some(1), serde_json::json!({}));
        m.add_input("data", &p).unwrap();
        assert!(m.verify().unwrap().is_empty());
        fs::write(&p, "two").unwrap();
        assert_eq!(m.verify().unwrap(), vec!["data".to_string()]);
    }
}
