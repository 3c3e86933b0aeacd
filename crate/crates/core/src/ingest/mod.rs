//! On-disk formats: feature matrices, label tables, masks, dataset manifests
//! and model checkpoints.

mod checkpoint;
mod dataset;
mod features;
mod labels;
mod manifest;
mod mask;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_VERSION};
pub use dataset::{Dataset, Unit};
pub use features::{decode_features, encode_features, load_features, save_features, VideoFeatures};
pub use labels::{
    load_labels, load_perf_matrix, save_labels, save_perf_matrix, LabelTable, ObjectKey, PerfEntry, PerformanceMatrix,
};
pub use manifest::{load_manifest, save_manifest, DatasetManifest, ManifestRecord};
pub use mask::{decode_pgm, encode_pgm, load_mask, save_mask, Mask};

use std::path::Path;

use crate::{Error, Result};

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
