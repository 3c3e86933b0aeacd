use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One video of a dataset. Relative paths resolve against the manifest's
/// own directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub video_id: String,
    pub n_frames: usize,
    pub feature_path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_dir: Option<PathBuf>,
}

/// Dataset manifest: one JSON object per line, `#` comments allowed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetManifest {
    pub records: Vec<ManifestRecord>,
    base_dir: PathBuf,
}

impl DatasetManifest {
    pub fn new(records: Vec<ManifestRecord>, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut seen = HashSet::new();
        for r in &records {
            if !seen.insert(r.video_id.as_str()) {
                return Err(Error::Data(format!("duplicate video id {}", r.video_id)));
            }
        }
        Ok(Self {
            records,
            base_dir: base_dir.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, video_id: &str) -> Option<&ManifestRecord> {
        self.records.iter().find(|r| r.video_id == video_id)
    }

    pub fn base_dir(&self) -> &Path {
        &self.base_dir
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    fn check_files(&self, origin: &Path) -> Result<()> {
        for r in &self.records {
            let paths = std::iter::once(Some(&r.feature_path))
                .chain([r.label_path.as_ref(), r.mask_dir.as_ref()])
                .flatten();
            for p in paths {
                let full = self.resolve(p);
                if !full.exists() {
                    return Err(Error::parse(
                        origin,
                        format!("{}: referenced file {} does not exist", r.video_id, full.display()),
                    ));
                }
            }
        }
        Ok(())
    }
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let rec: ManifestRecord =
            serde_json::from_str(line).map_err(|e| Error::parse(path, format!("line {}: {e}", i + 1)))?;
        records.push(rec);
    }
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let manifest = DatasetManifest::new(records, base).map_err(|e| Error::parse(path, e.to_string()))?;
    manifest.check_files(path)?;
    Ok(manifest)
}

pub fn save_manifest(manifest: &DatasetManifest, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    for r in &manifest.records {
        out.push_str(&serde_json::to_string(r).expect("manifest records serialize"));
        out.push('\n');
    }
    super::write_file(path.as_ref(), out.as_bytes())
}
