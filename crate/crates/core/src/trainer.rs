//! Configuration presets, training-tuple sampling and the optimisation loop.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ingest::{Dataset, ObjectKey, VideoFeatures};
use crate::losses::TrainingPair;
use crate::netcore::{backward, normalized_index, AdamState, FrameSample, LossKind, ModelConfig, ModelWeights};
use crate::{Error, Result, Scalar};

/// The five network variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// Frame indices, three reference frames, relative loss.
    Bn0,
    /// No input frame indices.
    Nifi,
    /// No reference frames.
    Nrf,
    /// Single-frame performance loss.
    Lsp,
    /// Middle-frame biased loss.
    Lf,
}

impl Preset {
    pub const ALL: [Preset; 5] = [Preset::Bn0, Preset::Nifi, Preset::Nrf, Preset::Lsp, Preset::Lf];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Bn0 => "BN0",
            Preset::Nifi => "NIFI",
            Preset::Nrf => "NRF",
            Preset::Lsp => "LSP",
            Preset::Lf => "LF",
        }
    }

    pub fn iterations(self) -> usize {
        match self {
            Preset::Bn0 => 3125,
            Preset::Nifi => 2500,
            Preset::Nrf => 3125,
            Preset::Lsp => 1875,
            Preset::Lf => 8125,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s) || (s.eq_ignore_ascii_case("bn_0") && *p == Preset::Bn0))
            .ok_or_else(|| Error::Config(format!("unknown preset `{s}` (expected BN0, NIFI, NRF, LSP or LF)")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSpec {
    pub preset: Preset,
    pub iterations: usize,
    pub batch_videos: usize,
    pub lr: f64,
    pub l1_coeff: f64,
    pub seed: u64,
}

pub const DESK_ITERATIONS: usize = 2000;
pub const DESK_BATCH_VIDEOS: usize = 64;
pub const PAPER_BATCH_VIDEOS: usize = 1024;

impl TrainSpec {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be positive".into()));
        }
        if self.batch_videos == 0 {
            return Err(Error::Config("batch_videos must be positive".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!("learning rate {} must be positive", self.lr)));
        }
        if !(self.l1_coeff >= 0.0 && self.l1_coeff.is_finite()) {
            return Err(Error::Config(format!(
                "L1 coefficient {} must be nonnegative",
                self.l1_coeff
            )));
        }
        Ok(())
    }

    /// Batch 64 and 2,000 iterations, small enough for a laptop.
    pub fn desk_scale(mut self) -> Self {
        self.iterations = DESK_ITERATIONS;
        self.batch_videos = DESK_BATCH_VIDEOS;
        self
    }
}

/// Model configuration and full-scale training schedule of a preset.
pub fn preset(id: Preset, feature_dim: usize) -> (ModelConfig, TrainSpec) {
    let mut cfg = ModelConfig::standard(feature_dim);
    match id {
        Preset::Bn0 => {}
        Preset::Nifi => cfg.use_indices = false,
        Preset::Nrf => cfg.num_refs = 0,
        Preset::Lsp => cfg.loss_kind = LossKind::Single,
        Preset::Lf => {
            cfg.loss_kind = LossKind::MiddleBiased;
            cfg.drop_index_inputs = false;
        }
    }
    let spec = TrainSpec {
        preset: id,
        iterations: id.iterations(),
        batch_videos: PAPER_BATCH_VIDEOS,
        lr: 1e-3,
        l1_coeff: 2e-6,
        seed: 0,
    };
    (cfg, spec)
}

#[derive(Debug, Clone)]
struct TrainUnit<T> {
    key: ObjectKey,
    video: usize,
    labels: Vec<T>,
}

/// Dataset converted to the training scalar type.
#[derive(Debug, Clone)]
pub struct TrainingData<T> {
    videos: Vec<VideoFeatures<T>>,
    units: Vec<TrainUnit<T>>,
}

impl<T: Scalar> TrainingData<T> {
    pub fn from_dataset(data: &Dataset) -> Self {
        Self {
            videos: data.videos().iter().map(VideoFeatures::cast).collect(),
            units: data
                .units()
                .iter()
                .map(|u| TrainUnit {
                    key: u.key.clone(),
                    video: u.video,
                    labels: data.unit_labels(u).iter().map(|&y| T::of(y)).collect(),
                })
                .collect(),
        }
    }

    pub fn feature_dim(&self) -> Option<usize> {
        self.videos.first().map(VideoFeatures::dim)
    }

    pub fn unit_count(&self) -> usize {
        self.units.len()
    }
}

/// Draws `batch_videos` (video, object) units uniformly with replacement and,
/// for each, `2 + k` distinct frames: the first two compared, the rest used
/// as references. Units too short for that are skipped and redrawn.
pub fn sample_batch<'a, T: Scalar, R: Rng + ?Sized>(
    data: &'a TrainingData<T>,
    rng: &mut R,
    batch_videos: usize,
    cfg: &ModelConfig,
) -> Result<Vec<TrainingPair<'a, T>>> {
    let needed = 2 + cfg.num_refs;
    if !data.units.iter().any(|u| data.videos[u.video].n_frames() >= needed) {
        return Err(Error::Data(format!(
            "no labeled video has the {needed} frames a training tuple needs"
        )));
    }
    let mut batch = Vec::with_capacity(batch_videos);
    while batch.len() < batch_videos {
        let unit = &data.units[rng.random_range(0..data.units.len())];
        let video = &data.videos[unit.video];
        let n = video.n_frames();
        if n < needed {
            log::warn!("skipping {}: {n} frames, need {needed}", unit.key);
            continue;
        }
        let positions = index::sample(rng, n, needed).into_vec();
        let frame = |p: usize| FrameSample {
            features: video.frame(p),
            index: normalized_index(p, n),
        };
        batch.push(TrainingPair {
            xi: frame(positions[0]),
            xj: frame(positions[1]),
            refs: positions[2..].iter().map(|&p| frame(p)).collect(),
            yi: unit.labels[positions[0]],
            yj: unit.labels[positions[1]],
        });
    }
    Ok(batch)
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<T> {
    pub weights: ModelWeights<T>,
    /// Mean absolute error of each iteration's batch, before the update.
    pub loss_curve: Vec<f64>,
}

pub fn train<T: Scalar>(data: &TrainingData<T>, cfg: &ModelConfig, spec: &TrainSpec) -> Result<TrainOutcome<T>> {
    train_with_progress(data, cfg, spec, |_, _| {})
}

/// Runs `spec.iterations` Adam steps; `progress` sees (iteration, batch loss).
pub fn train_with_progress<T: Scalar>(
    data: &TrainingData<T>,
    cfg: &ModelConfig,
    spec: &TrainSpec,
    mut progress: impl FnMut(usize, f64),
) -> Result<TrainOutcome<T>> {
    spec.validate()?;
    cfg.validate()?;
    match data.feature_dim() {
        Some(d) if d == cfg.feature_dim => {}
        Some(d) => {
            return Err(Error::Config(format!(
                "features have dimension {d}, model expects {}",
                cfg.feature_dim
            )))
        }
        None => return Err(Error::Data("empty training set".into())),
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut weights = ModelWeights::<T>::glorot(cfg, &mut rng)?;
    let mut adam = AdamState::new(weights.len());
    let lr = T::of(spec.lr);
    let l1 = T::of(spec.l1_coeff);
    let mut loss_curve = Vec::with_capacity(spec.iterations);
    for iteration in 0..spec.iterations {
        let pairs = sample_batch(data, &mut rng, spec.batch_videos, cfg)?;
        let samples: Vec<_> = pairs.iter().map(|p| p.sample(cfg)).collect();
        let obj = backward(&weights, cfg, &samples, l1, Some(&mut rng))?;
        let loss = obj.data_loss.as_f64();
        if !obj.loss.is_finite() {
            return Err(Error::NonFiniteLoss { iteration });
        }
        adam.step(weights.params_mut(), &obj.grad, lr);
        loss_curve.push(loss);
        progress(iteration, loss);
    }
    Ok(TrainOutcome { weights, loss_curve })
}
