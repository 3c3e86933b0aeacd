use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::stats::{summarize, Summary};
use crate::ingest::{Checkpoint, Dataset, ObjectKey};
use crate::netcore::{ModelConfig, ModelWeights};
use crate::sorter::{bubble_select, ModelPredictor, SortConfig};
use crate::strategies::{select, Strategy};
use crate::{Error, Result};

/// A model ready to drive the `bn` strategy.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub config: ModelConfig,
    pub weights: ModelWeights<f32>,
}

impl TrainedModel {
    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        Ok(Self {
            config: ck.config.clone(),
            weights: ck.model()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectScore {
    pub video: String,
    pub object: String,
    pub frame: usize,
    /// Label of the selected frame: video-wide mean J+F its annotation yields.
    pub score: f64,
}

#[derive(Debug, Clone)]
pub struct StrategyReport {
    pub strategy: Strategy,
    pub scores: Vec<ObjectScore>,
    pub summary: Summary<f64>,
    /// Wall-clock time of each bubble sort (`bn` only).
    pub sort_times: Vec<Duration>,
}

impl StrategyReport {
    pub fn mean_sort_time(&self) -> Option<Duration> {
        (!self.sort_times.is_empty()).then(|| self.sort_times.iter().sum::<Duration>() / self.sort_times.len() as u32)
    }
}

/// Selects one frame per (video, object) and scores it with the unit's label.
/// Every unit gets its own RNG seeded from a master stream on `sort.seed`,
/// so results do not depend on evaluation order.
pub fn benchmark(
    data: &Dataset,
    strategy: Strategy,
    model: Option<&TrainedModel>,
    sort: &SortConfig,
) -> Result<StrategyReport> {
    if data.units().is_empty() {
        return Err(Error::Data("dataset has no labeled objects".into()));
    }
    let model = match (strategy, model) {
        (Strategy::Bn, None) => return Err(Error::Config("strategy bn needs --model".into())),
        (Strategy::Bn, Some(m)) => {
            m.config.validate()?;
            Some(m)
        }
        _ => None,
    };
    let mut master = ChaCha8Rng::seed_from_u64(sort.seed);
    let mut scores = Vec::with_capacity(data.units().len());
    let mut sort_times = Vec::new();
    for unit in data.units() {
        let unit_seed: u64 = master.random();
        let y = data.unit_labels(unit);
        let video = &data.videos()[unit.video];
        let frame = match model {
            Some(m) => {
                let predictor = ModelPredictor::new(&m.weights, &m.config, video)?;
                let cfg = SortConfig {
                    seed: unit_seed,
                    ..*sort
                };
                let start = Instant::now();
                let result = bubble_select(&predictor, &cfg)?;
                sort_times.push(start.elapsed());
                result.selected_frame
            }
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(unit_seed);
                select(strategy, video.n_frames(), Some(y), Some(&mut rng))?
            }
        };
        scores.push(ObjectScore {
            video: unit.key.video.clone(),
            object: unit.key.object.clone(),
            frame,
            score: y[frame],
        });
    }
    let values: Vec<f64> = scores.iter().map(|s| s.score).collect();
    Ok(StrategyReport {
        strategy,
        summary: summarize(&values)?,
        scores,
        sort_times,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AblationRow {
    pub batch_size: usize,
    pub mean_jf: f64,
    pub mean_sort_time: Duration,
}

/// Benchmarks the `bn` strategy once per batch size.
pub fn ablate_batch(
    data: &Dataset,
    model: &TrainedModel,
    batches: &[usize],
    sort: &SortConfig,
) -> Result<Vec<AblationRow>> {
    batches
        .iter()
        .map(|&b| {
            let report = benchmark(data, Strategy::Bn, Some(model), &SortConfig { batch_size: b, ..*sort })?;
            Ok(AblationRow {
                batch_size: b,
                mean_jf: report.summary.mean,
                mean_sort_time: report.mean_sort_time().unwrap_or_default(),
            })
        })
        .collect()
}

/// Per-object scores as `video,object,frame,score`.
pub fn save_scores(report: &StrategyReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::parse(path, e.to_string()))?;
    for s in &report.scores {
        w.serialize(s).map_err(|e| Error::parse(path, e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_scores(path: impl AsRef<Path>) -> Result<Vec<ObjectScore>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::parse(path, e.to_string()))?;
    r.deserialize()
        .map(|row| row.map_err(|e| Error::parse(path, e.to_string())))
        .collect()
}

/// One-row summary: `strategy,count,mean,median,min,max,cov`.
pub fn save_summary(report: &StrategyReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let s = &report.summary;
    let text = format!(
        "strategy,count,mean,median,min,max,cov\n{},{},{},{},{},{},{}\n",
        report.strategy,
        s.count,
        s.mean,
        s.median,
        s.min,
        s.max,
        s.coefficient_of_variation.map(|c| c.to_string()).unwrap_or_default()
    );
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

impl ObjectScore {
    pub fn key(&self) -> ObjectKey {
        ObjectKey::new(&self.video, &self.object)
    }
}
