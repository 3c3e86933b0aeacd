use std::path::Path;

use crate::{Error, Result, Scalar};

const MAGIC: &[u8; 4] = b"BNF1";
const HEADER_LEN: usize = 12;

/// Per-frame feature vectors of one video, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoFeatures<T = f32> {
    video_id: String,
    n_frames: usize,
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> VideoFeatures<T> {
    pub fn new(video_id: impl Into<String>, n_frames: usize, dim: usize, data: Vec<T>) -> Result<Self> {
        if n_frames < 2 {
            return Err(Error::Data(format!("video needs at least 2 frames, got {n_frames}")));
        }
        if dim == 0 {
            return Err(Error::Data("feature dimension must be positive".into()));
        }
        if data.len() != n_frames * dim {
            return Err(Error::Shape(format!(
                "{} values for a {n_frames}x{dim} feature matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite feature at frame {}, component {}",
                pos / dim,
                pos % dim
            )));
        }
        Ok(Self {
            video_id: video_id.into(),
            n_frames,
            dim,
            data,
        })
    }

    pub fn video_id(&self) -> &str {
        &self.video_id
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn frame(&self, position: usize) -> &[T] {
        &self.data[position * self.dim..(position + 1) * self.dim]
    }

    pub fn set_video_id(&mut self, id: impl Into<String>) {
        self.video_id = id.into();
    }

    pub fn cast<U: Scalar>(&self) -> VideoFeatures<U> {
        VideoFeatures {
            video_id: self.video_id.clone(),
            n_frames: self.n_frames,
            dim: self.dim,
            data: self.data.iter().map(|v| U::of(v.as_f64())).collect(),
        }
    }
}

pub fn encode_features(features: &VideoFeatures<f32>) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * features.data.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(features.n_frames as u32).to_le_bytes());
    out.extend_from_slice(&(features.dim as u32).to_le_bytes());
    for v in &features.data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Decodes a BNF1 payload. `path` is used for error messages only; the
/// video id is taken from its file stem.
pub fn decode_features(bytes: &[u8], path: &Path) -> Result<VideoFeatures<f32>> {
    let fail = |offset: usize, reason: String| Error::Format {
        path: path.to_path_buf(),
        offset: offset as u64,
        reason,
    };
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(fail(0, "missing BNF1 magic".into()));
    }
    if bytes.len() < HEADER_LEN {
        return Err(fail(bytes.len(), "truncated header".into()));
    }
    let n_frames = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let dim = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    if n_frames < 2 {
        return Err(fail(4, format!("n_frames = {n_frames}, need at least 2")));
    }
    if dim == 0 {
        return Err(fail(8, "dim = 0".into()));
    }
    let expected = n_frames
        .checked_mul(dim)
        .and_then(|c| c.checked_mul(4))
        .and_then(|c| c.checked_add(HEADER_LEN))
        .ok_or_else(|| fail(4, "header dimensions overflow".into()))?;
    if bytes.len() < expected {
        return Err(fail(
            bytes.len(),
            format!("truncated payload, expected {expected} bytes"),
        ));
    }
    if bytes.len() > expected {
        return Err(fail(expected, "trailing bytes after payload".into()));
    }
    let mut data = Vec::with_capacity(n_frames * dim);
    for (k, chunk) in bytes[HEADER_LEN..].chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(fail(HEADER_LEN + 4 * k, format!("non-finite value {v}")));
        }
        data.push(v);
    }
    let video_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    VideoFeatures::new(video_id, n_frames, dim, data)
}

pub fn load_features(path: impl AsRef<Path>) -> Result<VideoFeatures<f32>> {
    let path = path.as_ref();
    decode_features(&super::read_file(path)?, path)
}

pub fn save_features(features: &VideoFeatures<f32>, path: impl AsRef<Path>) -> Result<()> {
    super::write_file(path.as_ref(), &encode_features(features))
}
