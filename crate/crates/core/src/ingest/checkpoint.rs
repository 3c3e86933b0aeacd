use std::path::Path;

use crate::netcore::{ModelConfig, ModelWeights};
use crate::{Error, Result, Scalar};

const MAGIC: &[u8; 4] = b"BNCK";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Model configuration plus flat `f32` weights in canonical layer order.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config: ModelConfig,
    pub weights: Vec<f32>,
}

impl Checkpoint {
    pub fn new(config: ModelConfig, weights: Vec<f32>) -> Result<Self> {
        config.validate()?;
        if weights.len() != config.param_count() {
            return Err(Error::Shape(format!(
                "{} weights, configuration needs {}",
                weights.len(),
                config.param_count()
            )));
        }
        Ok(Self { config, weights })
    }

    pub fn from_model<T: Scalar>(config: &ModelConfig, weights: &ModelWeights<T>) -> Result<Self> {
        Self::new(config.clone(), weights.params().iter().map(|w| w.as_f32()).collect())
    }

    pub fn model<T: Scalar>(&self) -> Result<ModelWeights<T>> {
        ModelWeights::from_flat(&self.config, self.weights.iter().map(|&w| T::of(w as f64)).collect())
    }

    /// Fails unless the stored configuration equals `expected`.
    pub fn expect_config(&self, expected: &ModelConfig) -> Result<()> {
        if &self.config == expected {
            return Ok(());
        }
        let mut diffs = Vec::new();
        let (a, b) = (&self.config, expected);
        if a.num_refs != b.num_refs {
            diffs.push(format!("num_refs {} != {}", a.num_refs, b.num_refs));
        }
        if a.feature_dim != b.feature_dim {
            diffs.push(format!("feature_dim {} != {}", a.feature_dim, b.feature_dim));
        }
        if a.loss_kind != b.loss_kind {
            diffs.push(format!("loss_kind {:?} != {:?}", a.loss_kind, b.loss_kind));
        }
        if a.use_indices != b.use_indices {
            diffs.push(format!("use_indices {} != {}", a.use_indices, b.use_indices));
        }
        if a.hidden_widths != b.hidden_widths {
            diffs.push(format!("hidden_widths {:?} != {:?}", a.hidden_widths, b.hidden_widths));
        }
        if diffs.is_empty() {
            diffs.push("hyperparameters differ".into());
        }
        Err(Error::ConfigMismatch(diffs.join(", ")))
    }

    pub fn encode(&self) -> Vec<u8> {
        let descriptor = serde_json::to_vec(&self.config).expect("config serializes");
        let mut out = Vec::with_capacity(12 + descriptor.len() + 4 * self.weights.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        out.extend_from_slice(&(descriptor.len() as u32).to_le_bytes());
        out.extend_from_slice(&descriptor);
        for w in &self.weights {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8], path: &Path) -> Result<Self> {
        let fail = |offset: usize, reason: String| Error::Format {
            path: path.to_path_buf(),
            offset: offset as u64,
            reason,
        };
        if bytes.len() < 4 || &bytes[..4] != MAGIC {
            return Err(fail(0, "missing BNCK magic".into()));
        }
        if bytes.len() < 12 {
            return Err(fail(bytes.len(), "truncated header".into()));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != CHECKPOINT_VERSION {
            return Err(fail(
                4,
                format!("checkpoint version {version}, expected {CHECKPOINT_VERSION}"),
            ));
        }
        let desc_len = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let desc_end = 12usize
            .checked_add(desc_len)
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| fail(bytes.len(), "truncated config descriptor".into()))?;
        let config: ModelConfig = serde_json::from_slice(&bytes[12..desc_end])
            .map_err(|e| fail(12, format!("bad config descriptor: {e}")))?;
        config.validate().map_err(|e| fail(12, e.to_string()))?;
        let count = config.param_count();
        let expected = desc_end + 4 * count;
        if bytes.len() != expected {
            return Err(fail(
                bytes.len().min(expected),
                format!(
                    "weight blob holds {} bytes, configuration needs {}",
                    bytes.len() - desc_end,
                    4 * count
                ),
            ));
        }
        let mut weights = Vec::with_capacity(count);
        for (k, chunk) in bytes[desc_end..].chunks_exact(4).enumerate() {
            let w = f32::from_le_bytes(chunk.try_into().unwrap());
            if !w.is_finite() {
                return Err(fail(desc_end + 4 * k, format!("non-finite weight {w}")));
            }
            weights.push(w);
        }
        Ok(Self { config, weights })
    }
}

pub fn save_checkpoint(checkpoint: &Checkpoint, path: impl AsRef<Path>) -> Result<()> {
    super::write_file(path.as_ref(), &checkpoint.encode())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    Checkpoint::decode(&super::read_file(path)?, path)
}
