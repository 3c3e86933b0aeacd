use std::path::Path;

use super::{load_features, load_labels, load_manifest, DatasetManifest, LabelTable, ObjectKey, VideoFeatures};
use crate::{Error, Result};

/// One labeled (video, object) pair of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Unit {
    pub key: ObjectKey,
    /// Index into [`Dataset::videos`].
    pub video: usize,
}

/// Features and labels with cross-file consistency checked.
#[derive(Debug, Clone)]
pub struct Dataset {
    videos: Vec<VideoFeatures<f32>>,
    labels: LabelTable,
    units: Vec<Unit>,
}

impl Dataset {
    /// Videos keep their given order; units follow video order, then object id.
    pub fn new(videos: Vec<VideoFeatures<f32>>, labels: LabelTable) -> Result<Self> {
        let mut units = Vec::new();
        for (vi, v) in videos.iter().enumerate() {
            if videos[..vi].iter().any(|o| o.video_id() == v.video_id()) {
                return Err(Error::Data(format!("duplicate video id {}", v.video_id())));
            }
            for (key, y) in labels.objects_of(v.video_id()) {
                if y.len() != v.n_frames() {
                    return Err(Error::Data(format!(
                        "{key} has {} labels but {} feature rows",
                        y.len(),
                        v.n_frames()
                    )));
                }
                units.push(Unit {
                    key: key.clone(),
                    video: vi,
                });
            }
        }
        if let Some((key, _)) = labels
            .iter()
            .find(|(k, _)| !videos.iter().any(|v| v.video_id() == k.video))
        {
            return Err(Error::Data(format!("labels for {key} but no such video")));
        }
        if let Some(v) = videos.iter().find(|v| labels.objects_of(v.video_id()).next().is_none()) {
            return Err(Error::Data(format!("video {} has no labeled objects", v.video_id())));
        }
        Ok(Self { videos, labels, units })
    }

    /// Loads every feature file of `manifest`. Without an explicit label
    /// table, per-record `label_path` files are merged instead.
    pub fn from_manifest(manifest: &DatasetManifest, labels: Option<LabelTable>) -> Result<Self> {
        let labels = match labels {
            Some(l) => l,
            None => {
                let mut merged = LabelTable::new();
                for r in &manifest.records {
                    if let Some(p) = &r.label_path {
                        merged.merge(load_labels(manifest.resolve(p))?)?;
                    }
                }
                merged
            }
        };
        labels.validate_against(manifest)?;
        let mut videos = Vec::with_capacity(manifest.len());
        for r in &manifest.records {
            let path = manifest.resolve(&r.feature_path);
            let mut f = load_features(&path)?;
            if f.n_frames() != r.n_frames {
                return Err(Error::Data(format!(
                    "{}: manifest declares {} frames, {} holds {}",
                    r.video_id,
                    r.n_frames,
                    path.display(),
                    f.n_frames()
                )));
            }
            f.set_video_id(r.video_id.clone());
            videos.push(f);
        }
        Self::new(videos, labels)
    }

    pub fn load(manifest: impl AsRef<Path>, labels: Option<&Path>) -> Result<Self> {
        let manifest = load_manifest(manifest)?;
        let labels = labels.map(load_labels).transpose()?;
        Self::from_manifest(&manifest, labels)
    }

    pub fn videos(&self) -> &[VideoFeatures<f32>] {
        &self.videos
    }

    pub fn labels(&self) -> &LabelTable {
        &self.labels
    }

    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    pub fn unit_labels(&self, unit: &Unit) -> &[f64] {
        self.labels
            .get(&unit.key)
            .expect("units are built from the label table")
    }

    pub fn feature_dim(&self) -> Option<usize> {
        self.videos.first().map(VideoFeatures::dim)
    }
}
