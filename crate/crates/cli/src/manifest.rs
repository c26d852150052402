use std::path::{Path, PathBuf};

use opseq_core::{Error, Result};
use serde::{Deserialize, Serialize};

pub const MANIFEST_NAME: &str = "run.json";

/// Artifact locations for one workspace. Relative paths are resolved
/// against the directory holding the manifest file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub workspace: PathBuf,
    pub dataset: PathBuf,
    pub vocabulary: PathBuf,
    pub grid_spec: Option<PathBuf>,
    pub results: PathBuf,
    pub analysis_dir: PathBuf,
    pub seed: u64,
}

impl RunManifest {
    pub fn new(workspace: PathBuf, seed: u64) -> Self {
        RunManifest {
            workspace,
            dataset: "dataset.csv".into(),
            vocabulary: "vocab.csv".into(),
            grid_spec: None,
            results: "results.csv".into(),
            analysis_dir: "analysis".into(),
            seed,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Data(format!("malformed run manifest: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Path {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|source| Error::Path {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// `path` joined onto the manifest's directory unless already absolute.
pub fn resolve(manifest_path: &Path, path: &Path) -> PathBuf {
    manifest_path.parent().unwrap_or(Path::new(".")).join(path)
}
