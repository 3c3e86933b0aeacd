use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::ingest::{
    save_features, save_labels, save_manifest, Dataset, DatasetManifest, LabelTable, ManifestRecord, ObjectKey,
    VideoFeatures,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelModel {
    /// `y = w . x + b` for a hidden `(w, b)` shared by all videos.
    Linear,
    /// Unimodal bump over time with a random peak per video.
    Peaked,
    /// Linear plus independent Gaussian noise per frame, clamped to [0, 2].
    NoisyLinear,
}

/// Parameters of a synthetic dataset. Written as TOML, e.g.
///
/// ```toml
/// videos = 50
/// frames_min = 20
/// frames_max = 40
/// dim = 16
/// label_model = "linear"
/// seed = 1
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub videos: usize,
    pub frames_min: usize,
    pub frames_max: usize,
    pub dim: usize,
    pub label_model: LabelModel,
    #[serde(default)]
    pub noise: f64,
    pub seed: u64,
    /// Seeds the hidden labelling function; defaults to `seed`. Datasets with
    /// equal task seeds share the same ground-truth functional.
    #[serde(default)]
    pub task_seed: Option<u64>,
}

pub const MIN_FRAMES: usize = 5;
pub const MAX_FRAMES: usize = 200;

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.videos == 0 || self.dim == 0 {
            return Err(Error::Config("videos and dim must be positive".into()));
        }
        if self.frames_min < MIN_FRAMES || self.frames_max > MAX_FRAMES || self.frames_min > self.frames_max {
            return Err(Error::Config(format!(
                "frame range [{}, {}] must lie within [{MIN_FRAMES}, {MAX_FRAMES}]",
                self.frames_min, self.frames_max
            )));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::Config(format!("noise {} must be nonnegative", self.noise)));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::parse(path, e.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub videos: Vec<VideoFeatures<f32>>,
    pub labels: LabelTable,
    pub hidden_w: Vec<f64>,
    pub hidden_b: f64,
}

impl SyntheticData {
    pub fn dataset(&self) -> Result<Dataset> {
        Dataset::new(self.videos.clone(), self.labels.clone())
    }

    /// `w . x + b` for one frame of one video.
    pub fn linear_score(&self, video: usize, frame: usize) -> f64 {
        linear(&self.hidden_w, self.hidden_b, self.videos[video].frame(frame))
    }
}

fn linear(w: &[f64], b: f64, x: &[f32]) -> f64 {
    b + w.iter().zip(x).map(|(w, &x)| w * x as f64).sum::<f64>()
}

/// Smooth per-dimension trajectories squashed into (-1, 1):
/// `tanh(base + amp * sin(2 pi freq t + phase))` with `t` in [0, 1].
fn drifting_features<R: Rng>(rng: &mut R, n: usize, dim: usize) -> Vec<f32> {
    let unit = Normal::new(0.0, 0.5).expect("valid");
    let params: Vec<(f64, f64, f64, f64)> = (0..dim)
        .map(|_| {
            (
                unit.sample(rng),
                rng.random_range(0.3..1.0),
                rng.random_range(0.3..1.5),
                rng.random_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    let mut data = Vec::with_capacity(n * dim);
    for i in 0..n {
        let t = i as f64 / (n - 1) as f64;
        for &(base, amp, freq, phase) in &params {
            data.push((base + amp * (std::f64::consts::TAU * freq * t + phase).sin()).tanh() as f32);
        }
    }
    data
}

pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticData> {
    spec.validate()?;
    // hidden functional: ||w||_1 = 0.9, b = 1, so y stays inside (0.1, 1.9)
    let mut task = ChaCha8Rng::seed_from_u64(spec.task_seed.unwrap_or(spec.seed));
    let raw: Vec<f64> = (0..spec.dim)
        .map(|_| Normal::new(0.0, 1.0).unwrap().sample(&mut task))
        .collect();
    let norm: f64 = raw.iter().map(|v| v.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
    let hidden_w: Vec<f64> = raw.iter().map(|v| 0.9 * v / norm).collect();
    let hidden_b = 1.0;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise.max(0.0)).map_err(|e| Error::Config(e.to_string()))?;
    let mut videos = Vec::with_capacity(spec.videos);
    let mut labels = LabelTable::new();
    let width = (spec.videos.max(1) - 1).to_string().len().max(3);
    for v in 0..spec.videos {
        let id = format!("syn{v:0width$}");
        let n = rng.random_range(spec.frames_min..=spec.frames_max);
        let data = drifting_features(&mut rng, n, spec.dim);
        let features = VideoFeatures::new(&id, n, spec.dim, data)?;
        let y: Vec<f64> = match spec.label_model {
            LabelModel::Linear => (0..n).map(|i| linear(&hidden_w, hidden_b, features.frame(i))).collect(),
            LabelModel::NoisyLinear => (0..n)
                .map(|i| (linear(&hidden_w, hidden_b, features.frame(i)) + noise.sample(&mut rng)).clamp(0.0, 2.0))
                .collect(),
            LabelModel::Peaked => {
                let peak = rng.random_range(0.0..1.0);
                let width = rng.random_range(0.1..0.3);
                let base = rng.random_range(0.6..1.0);
                let amp = rng.random_range(0.2..0.6);
                (0..n)
                    .map(|i| {
                        let t = i as f64 / (n - 1) as f64;
                        base + amp * (-0.5 * ((t - peak) / width).powi(2)).exp()
                    })
                    .collect()
            }
        };
        labels.insert(ObjectKey::new(&id, "0"), y)?;
        videos.push(features);
    }
    Ok(SyntheticData {
        videos,
        labels,
        hidden_w,
        hidden_b,
    })
}

#[derive(Debug, Clone)]
pub struct SyntheticOutput {
    pub manifest_path: PathBuf,
    pub labels_path: PathBuf,
    pub data: SyntheticData,
}

/// Writes `manifest.txt`, `labels.csv` and `features/<video>.bnf` under `out_dir`.
pub fn make_synthetic(spec: &SyntheticSpec, out_dir: impl AsRef<Path>) -> Result<SyntheticOutput> {
    let out_dir = out_dir.as_ref();
    let data = generate(spec)?;
    let feature_dir = out_dir.join("features");
    std::fs::create_dir_all(&feature_dir).map_err(|e| Error::io(&feature_dir, e))?;
    let mut records = Vec::with_capacity(data.videos.len());
    for v in &data.videos {
        let rel = PathBuf::from("features").join(format!("{}.bnf", v.video_id()));
        save_features(v, out_dir.join(&rel))?;
        records.push(ManifestRecord {
            video_id: v.video_id().to_string(),
            n_frames: v.n_frames(),
            feature_path: rel,
            label_path: None,
            mask_dir: None,
        });
    }
    let manifest_path = out_dir.join("manifest.txt");
    let labels_path = out_dir.join("labels.csv");
    save_manifest(&DatasetManifest::new(records, out_dir)?, &manifest_path)?;
    save_labels(&data.labels, &labels_path)?;
    Ok(SyntheticOutput {
        manifest_path,
        labels_path,
        data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(model: LabelModel) -> SyntheticSpec {
        SyntheticSpec {
            videos: 10,
            frames_min: 20,
            frames_max: 40,
            dim: 6,
            label_model: model,
            noise: 0.05,
            seed: 4,
            task_seed: None,
        }
    }

    #[test]
    fn shapes_match_spec() {
        let d = generate(&spec(LabelModel::Linear)).unwrap();
        assert_eq!(d.videos.len(), 10);
        for v in &d.videos {
            assert!((20..=40).contains(&v.n_frames()));
            assert_eq!(
                d.labels.get(&ObjectKey::new(v.video_id(), "0")).unwrap().len(),
                v.n_frames()
            );
        }
    }

    #[test]
    fn linear_argmax_is_hidden_argmax() {
        let d = generate(&spec(LabelModel::Linear)).unwrap();
        for (vi, v) in d.videos.iter().enumerate() {
            let y = d.labels.get(&ObjectKey::new(v.video_id(), "0")).unwrap();
            let argmax = |f: &dyn Fn(usize) -> f64| (0..v.n_frames()).max_by(|&a, &b| f(a).total_cmp(&f(b))).unwrap();
            assert_eq!(argmax(&|i| y[i]), argmax(&|i| d.linear_score(vi, i)));
            assert!(y.iter().all(|&v| (0.0..=2.0).contains(&v)));
        }
    }

    #[test]
    fn peaked_labels_are_unimodal() {
        let d = generate(&spec(LabelModel::Peaked)).unwrap();
        for (_, y) in d.labels.iter() {
            let top = (0..y.len()).max_by(|&a, &b| y[a].total_cmp(&y[b])).unwrap();
            assert!(y[..=top].windows(2).all(|w| w[0] <= w[1]));
            assert!(y[top..].windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn task_seed_shares_the_functional() {
        let mut a = spec(LabelModel::Linear);
        a.task_seed = Some(77);
        let mut b = a.clone();
        b.seed = 99;
        let (da, db) = (generate(&a).unwrap(), generate(&b).unwrap());
        assert_eq!(da.hidden_w, db.hidden_w);
        assert_ne!(da.videos[0], db.videos[0]);
    }

    #[test]
    fn rejects_bad_frame_range() {
        let mut s = spec(LabelModel::Linear);
        s.frames_min = 3;
        assert!(s.validate().is_err());
        s.frames_min = 50;
        s.frames_max = 201;
        assert!(s.validate().is_err());
    }

    #[test]
    fn parses_toml() {
        let s = SyntheticSpec::from_toml(
            "videos = 3\nframes_min = 5\nframes_max = 9\ndim = 2\nlabel_model = \"noisy-linear\"\nnoise = 0.1\nseed = 8\n",
        )
        .unwrap();
        assert_eq!(s.label_model, LabelModel::NoisyLinear);
        assert_eq!(s.task_seed, None);
        assert!(SyntheticSpec::from_toml("videos = 3\nbogus = 1\n").is_err());
    }
}
