//! Deep bubble sort: adjacent frames are compared with a stochastic learned
//! predictor (summed over a batch of reference-set draws) and swapped so the
//! frame predicted to perform better moves toward the end of the list. The
//! last frame after all sweeps is selected.

use std::io::Write;
use std::path::Path;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ingest::VideoFeatures;
use crate::netcore::{normalized_index, FrameSample, LossKind, ModelConfig, ModelWeights, NetInput};
use crate::{Error, Result, Scalar};

/// Source of single predictions of `y_a - y_b` for frames of one video.
pub trait RelativePredictor {
    fn n_frames(&self) -> usize;

    fn predict<R: Rng + ?Sized>(&self, a: usize, b: usize, rng: &mut R) -> Result<f64>;
}

/// Sum of `batch` independent predictions, accumulated in draw order.
pub fn compare<P: RelativePredictor + ?Sized, R: Rng + ?Sized>(
    predictor: &P,
    a: usize,
    b: usize,
    batch: usize,
    rng: &mut R,
) -> Result<f64> {
    if a == b {
        return Err(Error::Data(format!("cannot compare frame {a} with itself")));
    }
    let mut sum = 0.0;
    for _ in 0..batch {
        sum += predictor.predict(a, b, rng)?;
    }
    Ok(sum)
}

/// A trained network applied to one video.
#[derive(Debug, Clone, Copy)]
pub struct ModelPredictor<'a, T> {
    weights: &'a ModelWeights<T>,
    cfg: &'a ModelConfig,
    video: &'a VideoFeatures<T>,
}

impl<'a, T: Scalar> ModelPredictor<'a, T> {
    pub fn new(weights: &'a ModelWeights<T>, cfg: &'a ModelConfig, video: &'a VideoFeatures<T>) -> Result<Self> {
        if video.dim() != cfg.feature_dim {
            return Err(Error::Shape(format!(
                "video {} has {}-dimensional features, model expects {}",
                video.video_id(),
                video.dim(),
                cfg.feature_dim
            )));
        }
        if cfg.num_refs > 0 && video.n_frames() < 2 + cfg.num_refs {
            return Err(Error::Data(format!(
                "video {} has {} frames; comparing with {} reference frames needs {}",
                video.video_id(),
                video.n_frames(),
                cfg.num_refs,
                2 + cfg.num_refs
            )));
        }
        Ok(Self { weights, cfg, video })
    }

    fn frame(&self, p: usize) -> FrameSample<'a, T> {
        FrameSample {
            features: self.video.frame(p),
            index: normalized_index(p, self.video.n_frames()),
        }
    }

    /// `k` distinct positions, none equal to `a` or `b`.
    fn draw_refs<R: Rng + ?Sized>(&self, a: usize, b: usize, rng: &mut R) -> Vec<FrameSample<'a, T>> {
        let k = self.cfg.num_refs;
        if k == 0 {
            return Vec::new();
        }
        let (lo, hi) = (a.min(b), a.max(b));
        index::sample(rng, self.video.n_frames() - 2, k)
            .into_iter()
            .map(|mut p| {
                if p >= lo {
                    p += 1;
                }
                if p >= hi {
                    p += 1;
                }
                self.frame(p)
            })
            .collect()
    }
}

impl<T: Scalar> RelativePredictor for ModelPredictor<'_, T> {
    fn n_frames(&self) -> usize {
        self.video.n_frames()
    }

    fn predict<R: Rng + ?Sized>(&self, a: usize, b: usize, rng: &mut R) -> Result<f64> {
        let refs = self.draw_refs(a, b, rng);
        let eval = |input: NetInput<'_, T>| {
            self.weights
                .forward::<ChaCha8Rng>(self.cfg, &input, None)
                .map(Scalar::as_f64)
        };
        match self.cfg.loss_kind {
            LossKind::Single => {
                let fa = eval(NetInput {
                    xi: self.frame(a),
                    xj: None,
                    refs: refs.clone(),
                })?;
                let fb = eval(NetInput {
                    xi: self.frame(b),
                    xj: None,
                    refs,
                })?;
                Ok(fa - fb)
            }
            LossKind::Relative | LossKind::MiddleBiased => eval(NetInput {
                xi: self.frame(a),
                xj: Some(self.frame(b)),
                refs,
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SortConfig {
    /// Reference-set draws summed per comparison.
    pub batch_size: usize,
    /// Full sweeps over the list; `None` means one per frame.
    pub passes: Option<usize>,
    pub seed: u64,
}

pub const DEFAULT_BATCH_SIZE: usize = 5;

impl Default for SortConfig {
    fn default() -> Self {
        Self {
            batch_size: DEFAULT_BATCH_SIZE,
            passes: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRecord {
    pub pass: usize,
    pub position: usize,
    pub frame_a: usize,
    pub frame_b: usize,
    pub summed_f: f64,
    pub swapped: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SortTrace {
    pub comparisons: Vec<ComparisonRecord>,
    pub ranking: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub selected_frame: usize,
    /// Final order, worst predicted first; the last entry is selected.
    pub ranking: Vec<usize>,
    pub trace: SortTrace,
}

pub fn bubble_select<P: RelativePredictor + ?Sized>(predictor: &P, cfg: &SortConfig) -> Result<SelectionResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    bubble_select_with_rng(predictor, cfg.batch_size, cfg.passes, &mut rng)
}

/// Every sweep scans the whole list, so frames promoted earlier can still be
/// demoted. Ties (`summed_f == 0`) never swap.
pub fn bubble_select_with_rng<P: RelativePredictor + ?Sized, R: Rng + ?Sized>(
    predictor: &P,
    batch_size: usize,
    passes: Option<usize>,
    rng: &mut R,
) -> Result<SelectionResult> {
    let n = predictor.n_frames();
    if n < 2 {
        return Err(Error::Data(format!("sorting needs at least 2 frames, got {n}")));
    }
    if batch_size == 0 {
        return Err(Error::Config("batch size must be at least 1".into()));
    }
    let passes = passes.unwrap_or(n);
    let mut order: Vec<usize> = (0..n).collect();
    let mut comparisons = Vec::with_capacity(passes * (n - 1));
    for pass in 0..passes {
        for position in 0..n - 1 {
            let (a, b) = (order[position], order[position + 1]);
            let summed_f = compare(predictor, a, b, batch_size, rng)?;
            let swapped = summed_f > 0.0;
            if swapped {
                order.swap(position, position + 1);
            }
            comparisons.push(ComparisonRecord {
                pass,
                position,
                frame_a: a,
                frame_b: b,
                summed_f,
                swapped,
            });
        }
    }
    if !is_permutation(&order) {
        return Err(Error::Data(format!(
            "sort produced a non-permutation ranking {order:?}"
        )));
    }
    Ok(SelectionResult {
        selected_frame: order[n - 1],
        ranking: order.clone(),
        trace: SortTrace {
            comparisons,
            ranking: order,
        },
    })
}

pub fn is_permutation(order: &[usize]) -> bool {
    let mut seen = vec![false; order.len()];
    order
        .iter()
        .all(|&p| p < seen.len() && !std::mem::replace(&mut seen[p], true))
}

pub fn write_trace_csv<W: Write>(trace: &SortTrace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let to_err = |e: csv::Error| Error::Data(format!("writing trace: {e}"));
    w.write_record(["pass", "position", "frame_a", "frame_b", "summed_f", "swapped"])
        .map_err(to_err)?;
    for c in &trace.comparisons {
        w.write_record([
            c.pass.to_string(),
            c.position.to_string(),
            c.frame_a.to_string(),
            c.frame_b.to_string(),
            c.summed_f.to_string(),
            u8::from(c.swapped).to_string(),
        ])
        .map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::Data(format!("writing trace: {e}")))
}

pub fn save_trace(trace: &SortTrace, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_trace_csv(trace, std::io::BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    /// Returns the true label difference.
    struct Oracle(Vec<f64>);

    impl RelativePredictor for Oracle {
        fn n_frames(&self) -> usize {
            self.0.len()
        }

        fn predict<R: Rng + ?Sized>(&self, a: usize, b: usize, _: &mut R) -> Result<f64> {
            Ok(self.0[a] - self.0[b])
        }
    }

    struct Noisy(Vec<f64>, f64);

    impl RelativePredictor for Noisy {
        fn n_frames(&self) -> usize {
            self.0.len()
        }

        fn predict<R: Rng + ?Sized>(&self, a: usize, b: usize, rng: &mut R) -> Result<f64> {
            Ok(self.0[a] - self.0[b] + Normal::new(0.0, self.1).unwrap().sample(rng))
        }
    }

    #[test]
    fn oracle_sorts_three_frames() {
        let r = bubble_select(&Oracle(vec![0.1, 0.9, 0.3]), &SortConfig::default()).unwrap();
        assert_eq!(r.ranking, vec![0, 2, 1]);
        assert_eq!(r.selected_frame, 1);
        assert_eq!(r.trace.comparisons.len(), 3 * 2);
    }

    #[test]
    fn ties_never_swap() {
        let r = bubble_select(&Oracle(vec![0.5; 6]), &SortConfig::default()).unwrap();
        assert!(r.trace.comparisons.iter().all(|c| !c.swapped));
        assert_eq!(r.selected_frame, 5);
        assert_eq!(r.ranking, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn oracle_sum_scales_with_batch() {
        let o = Oracle(vec![0.2, 0.7]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = compare(&o, 1, 0, 4, &mut rng).unwrap();
        assert!((s - 4.0 * 0.5).abs() < 1e-12);
        assert!(compare(&o, 1, 1, 4, &mut rng).is_err());
    }

    #[test]
    fn swap_flags_follow_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let y: Vec<f64> = (0..12).map(|_| rng.random()).collect();
        let r = bubble_select(
            &Noisy(y, 0.2),
            &SortConfig {
                seed: 5,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(r.trace.comparisons.iter().all(|c| c.swapped == (c.summed_f > 0.0)));
        assert!(is_permutation(&r.ranking));
    }

    fn tiny_model(k: usize, kind: LossKind) -> (ModelConfig, ModelWeights<f64>, VideoFeatures<f64>) {
        let cfg = ModelConfig {
            num_refs: k,
            loss_kind: kind,
            hidden_widths: vec![8, 6, 4, 2],
            ..ModelConfig::standard(3)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let w = ModelWeights::glorot(&cfg, &mut rng).unwrap();
        let data = (0..30).map(|_| rng.random_range(-1.0..1.0)).collect();
        (cfg, w, VideoFeatures::new("v", 10, 3, data).unwrap())
    }

    #[test]
    fn zero_model_compares_to_zero() {
        let (cfg, _, video) = tiny_model(3, LossKind::Relative);
        let w = ModelWeights::zeros(&cfg).unwrap();
        let p = ModelPredictor::new(&w, &cfg, &video).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(compare(&p, 2, 7, 5, &mut rng).unwrap(), 0.0);
        assert_eq!(bubble_select(&p, &SortConfig::default()).unwrap().selected_frame, 9);
    }

    #[test]
    fn no_refs_is_deterministic() {
        let (cfg, w, video) = tiny_model(0, LossKind::Relative);
        let p = ModelPredictor::new(&w, &cfg, &video).unwrap();
        let one = compare(&p, 1, 4, 1, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let five = compare(&p, 1, 4, 5, &mut ChaCha8Rng::seed_from_u64(99)).unwrap();
        assert!((five - 5.0 * one).abs() < 1e-12);
        let a = bubble_select(
            &p,
            &SortConfig {
                seed: 1,
                ..Default::default()
            },
        )
        .unwrap();
        let b = bubble_select(
            &p,
            &SortConfig {
                seed: 2,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(a.ranking, b.ranking);
    }

    #[test]
    fn single_frame_model_is_antisymmetric_per_draw() {
        let (cfg, w, video) = tiny_model(3, LossKind::Single);
        let p = ModelPredictor::new(&w, &cfg, &video).unwrap();
        let ab = p.predict(2, 5, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let ba = p.predict(5, 2, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert!((ab + ba).abs() < 1e-12);
    }

    #[test]
    fn refs_exclude_compared_frames() {
        let (cfg, w, video) = tiny_model(3, LossKind::Relative);
        let p = ModelPredictor::new(&w, &cfg, &video).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..500 {
            let (a, b) = (rng.random_range(0..10), rng.random_range(0..10));
            if a == b {
                continue;
            }
            let refs = p.draw_refs(a, b, &mut rng);
            let mut pos: Vec<usize> = refs.iter().map(|f| (f.index * 10.0).round() as usize - 1).collect();
            assert!(pos.iter().all(|&q| q != a && q != b && q < 10));
            pos.sort();
            pos.dedup();
            assert_eq!(pos.len(), 3);
        }
    }

    #[test]
    fn short_video_is_rejected() {
        let cfg = ModelConfig {
            hidden_widths: vec![8, 6, 4, 2],
            ..ModelConfig::standard(1)
        };
        let w = ModelWeights::<f64>::zeros(&cfg).unwrap();
        let video = VideoFeatures::new("v", 4, 1, vec![0.0; 4]).unwrap();
        assert!(ModelPredictor::new(&w, &cfg, &video).is_err());
    }

    #[test]
    fn per_unit_variance_shrinks_with_batch() {
        let (cfg, w, video) = tiny_model(3, LossKind::Relative);
        let p = ModelPredictor::new(&w, &cfg, &video).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let var_of = |b: usize, rng: &mut ChaCha8Rng| {
            let xs: Vec<f64> = (0..2000)
                .map(|_| compare(&p, 0, 9, b, rng).unwrap() / b as f64)
                .collect();
            let m = xs.iter().sum::<f64>() / xs.len() as f64;
            xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
        };
        let v: Vec<f64> = [1, 2, 5, 10].iter().map(|&b| var_of(b, &mut rng)).collect();
        assert!(v[0] > 0.0);
        // variance of the mean falls like 1/B; allow sampling slack
        for w2 in v.windows(2) {
            assert!(w2[1] <= w2[0] * 1.1, "{v:?}");
        }
    }

    #[test]
    fn trace_csv_layout() {
        let r = bubble_select(
            &Oracle(vec![0.75, 0.25]),
            &SortConfig {
                passes: Some(1),
                ..Default::default()
            },
        )
        .unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&r.trace, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "pass,position,frame_a,frame_b,summed_f,swapped\n0,0,0,1,2.5,1\n");
    }
}
