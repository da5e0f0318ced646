//! Run manifests: which files a stage read and wrote, with content digests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Json { path: PathBuf, message: String },
    #[error("{path}: digest mismatch (recorded {recorded}, found {found})")]
    Mismatch {
        path: PathBuf,
        recorded: String,
        found: String,
    },
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    /// Relative to the manifest's directory when the file lies below it.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

fn relative(path: &Path, base: &Path) -> String {
    path.strip_prefix(base).unwrap_or(path).to_string_lossy().replace('\\', "/")
}

pub fn digest_file(path: &Path, base: &Path) -> Result<FileDigest, ManifestError> {
    let data = fs::read(path).map_err(|source| ManifestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(FileDigest {
        path: relative(path, base),
        sha256: sha256_hex(&data),
        bytes: data.len() as u64,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub stage: String,
    pub config_hash: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub started_at: String,
    pub finished_at: String,
}

impl RunManifest {
    pub fn new(stage: &str, config_hash: &str, seed: u64) -> Self {
        let now = chrono::Utc::now().to_rfc3339();
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            stage: stage.to_string(),
            config_hash: config_hash.to_string(),
            seed,
            model: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            started_at: now.clone(),
            finished_at: now,
        }
    }

    /// Records digests and the finish time, then writes the manifest to
    /// `path`. File paths are stored relative to the manifest's directory.
    pub fn finish(mut self, path: &Path, inputs: &[&Path], outputs: &[&Path]) -> Result<Self, ManifestError> {
        let base = path.parent().unwrap_or(Path::new(""));
        self.inputs = inputs.iter().map(|p| digest_file(p, base)).collect::<Result<_, _>>()?;
        self.outputs = outputs.iter().map(|p| digest_file(p, base)).collect::<Result<_, _>>()?;
        self.finished_at = chrono::Utc::now().to_rfc3339();
        let text = serde_json::to_string_pretty(&self).expect("manifest serializes");
        fs::write(path, text + "\n").map_err(|source| ManifestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(self)
    }

    pub fn load(path: &Path) -> Result<Self, ManifestError> {
        let text = fs::read_to_string(path).map_err(|source| ManifestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| ManifestError::Json {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Recomputes every output digest, resolving paths against `base`.
    pub fn verify_outputs(&self, base: &Path) -> Result<(), ManifestError> {
        for d in &self.outputs {
            let p = base.join(&d.path);
            let found = digest_file(&p, base)?;
            if found.sha256 != d.sha256 {
                return Err(ManifestError::Mismatch {
                    path: p,
                    recorded: d.sha256.clone(),
                    found: found.sha256,
                });
            }
        }
        Ok(())
    }

    /// Whether `file` is among the outputs with a matching digest.
    pub fn covers(&self, file: &Path, base: &Path) -> Result<bool, ManifestError> {
        let found = digest_file(file, base)?;
        Ok(self.outputs.iter().any(|d| d.path == found.path && d.sha256 == found.sha256))
    }
}
