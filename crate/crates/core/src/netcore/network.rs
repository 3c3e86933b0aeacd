use rand::distr::{Distribution, Uniform};
use rand::Rng;

use super::config::{LayerShape, ModelConfig};
use crate::{Error, Result, Scalar};

/// Normalized frame index `(position + 1) / n` for a 0-based position, so
/// the last frame maps to exactly 1.
pub fn normalized_index<T: Scalar>(position: usize, n: usize) -> T {
    assert!(position < n, "frame position {position} out of range for {n} frames");
    T::of((position + 1) as f64) / T::of(n as f64)
}

/// One frame as the network sees it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameSample<'a, T> {
    pub features: &'a [T],
    pub index: T,
}

/// Frames feeding a single prediction, in input-slot order.
#[derive(Debug, Clone, PartialEq)]
pub struct NetInput<'a, T> {
    pub xi: FrameSample<'a, T>,
    pub xj: Option<FrameSample<'a, T>>,
    pub refs: Vec<FrameSample<'a, T>>,
}

impl<'a, T: Copy> NetInput<'a, T> {
    fn frames(&self) -> impl Iterator<Item = &FrameSample<'a, T>> {
        std::iter::once(&self.xi)
            .chain(self.xj.as_ref())
            .chain(self.refs.iter())
    }
}

/// A network input paired with its regression target.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<'a, T> {
    pub input: NetInput<'a, T>,
    pub target: T,
}

/// Trainable parameters as one flat vector in canonical order
/// (per layer: weights then biases, first hidden layer to output neuron).
#[derive(Debug, Clone, PartialEq)]
pub struct ModelWeights<T> {
    shapes: Vec<LayerShape>,
    params: Vec<T>,
}

#[derive(Debug, Clone)]
struct Tape<T> {
    /// Input each layer multiplied, after dropout.
    inputs: Vec<Vec<T>>,
    /// Dropout scale per input element of each layer, when dropout ran.
    masks: Vec<Option<Vec<T>>>,
    /// Pre-activations of the hidden layers.
    pre: Vec<Vec<T>>,
    output: T,
}

/// Value and gradient of the mean absolute-error objective plus L1 penalty.
#[derive(Debug, Clone, PartialEq)]
pub struct Objective<T> {
    pub loss: T,
    pub data_loss: T,
    pub grad: Vec<T>,
}

fn sign<T: Scalar>(v: T) -> T {
    if v > T::zero() {
        T::one()
    } else if v < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

impl<T: Scalar> ModelWeights<T> {
    pub fn zeros(cfg: &ModelConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            shapes: cfg.layer_shapes(),
            params: vec![T::zero(); cfg.param_count()],
        })
    }

    /// Glorot-uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero biases.
    pub fn glorot<R: Rng + ?Sized>(cfg: &ModelConfig, rng: &mut R) -> Result<Self> {
        let mut w = Self::zeros(cfg)?;
        for s in w.shapes.clone() {
            let bound = (6.0 / (s.inputs + s.outputs) as f64).sqrt();
            let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
            for p in &mut w.params[s.weight_range()] {
                *p = T::of(dist.sample(rng));
            }
        }
        Ok(w)
    }

    pub fn from_flat(cfg: &ModelConfig, params: Vec<T>) -> Result<Self> {
        cfg.validate()?;
        if params.len() != cfg.param_count() {
            return Err(Error::Shape(format!(
                "{} parameters, configuration needs {}",
                params.len(),
                cfg.param_count()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Data("non-finite weight".into()));
        }
        Ok(Self {
            shapes: cfg.layer_shapes(),
            params,
        })
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    pub fn into_params(self) -> Vec<T> {
        self.params
    }

    pub fn shapes(&self) -> &[LayerShape] {
        &self.shapes
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn cast<U: Scalar>(&self) -> ModelWeights<U> {
        ModelWeights {
            shapes: self.shapes.clone(),
            params: self.params.iter().map(|p| U::of(p.as_f64())).collect(),
        }
    }

    /// Sum of absolute weights, biases excluded.
    pub fn l1_norm(&self) -> T {
        self.shapes
            .iter()
            .flat_map(|s| self.params[s.weight_range()].iter())
            .map(|w| w.abs())
            .sum()
    }

    fn check(&self, cfg: &ModelConfig, input: &NetInput<'_, T>) -> Result<()> {
        if self.shapes != cfg.layer_shapes() {
            return Err(Error::Shape("weights do not match the model configuration".into()));
        }
        if input.xj.is_some() != (cfg.comparison_frames() == 2) {
            return Err(Error::Shape(format!(
                "{:?} loss expects {} comparison frame(s)",
                cfg.loss_kind,
                cfg.comparison_frames()
            )));
        }
        if input.refs.len() != cfg.num_refs {
            return Err(Error::Shape(format!(
                "{} reference frames given, configuration uses {}",
                input.refs.len(),
                cfg.num_refs
            )));
        }
        if let Some(f) = input.frames().find(|f| f.features.len() != cfg.feature_dim) {
            return Err(Error::Shape(format!(
                "frame has {} features, configuration expects {}",
                f.features.len(),
                cfg.feature_dim
            )));
        }
        Ok(())
    }

    /// Predicted relative performance. Dropout is applied only when an RNG
    /// is supplied.
    pub fn forward<R: Rng + ?Sized>(
        &self,
        cfg: &ModelConfig,
        input: &NetInput<'_, T>,
        dropout: Option<&mut R>,
    ) -> Result<T> {
        self.check(cfg, input)?;
        Ok(self.run(cfg, input, dropout).output)
    }

    fn run<R: Rng + ?Sized>(&self, cfg: &ModelConfig, input: &NetInput<'_, T>, mut dropout: Option<&mut R>) -> Tape<T> {
        let hidden = cfg.hidden_widths.len();
        let slope = T::of(cfg.leaky_slope);
        let rate = cfg.dropout_rate;
        let keep_scale = T::of(1.0 / (1.0 - rate));
        let idx: Vec<T> = if cfg.use_indices {
            input.frames().map(|f| f.index).collect()
        } else {
            Vec::new()
        };

        let mut tape = Tape {
            inputs: Vec::with_capacity(hidden + 1),
            masks: Vec::with_capacity(hidden + 1),
            pre: Vec::with_capacity(hidden),
            output: T::zero(),
        };
        let mut u: Vec<T> = input.frames().flat_map(|f| f.features.iter().copied()).collect();
        u.extend_from_slice(&idx);

        for (l, s) in self.shapes.iter().enumerate() {
            let mut mask = None;
            if l > 0 && l < hidden && rate > 0.0 {
                if let Some(rng) = dropout.as_deref_mut() {
                    let droppable = if cfg.drop_index_inputs {
                        u.len()
                    } else {
                        u.len() - idx.len()
                    };
                    let m: Vec<T> = (0..u.len())
                        .map(|e| {
                            if e >= droppable {
                                T::one()
                            } else if rng.random::<f64>() < rate {
                                T::zero()
                            } else {
                                keep_scale
                            }
                        })
                        .collect();
                    for (x, &k) in u.iter_mut().zip(&m) {
                        *x = *x * k;
                    }
                    mask = Some(m);
                }
            }

            let w = &self.params[s.weight_range()];
            let mut z = self.params[s.bias_range()].to_vec();
            for (i, &ui) in u.iter().enumerate() {
                if ui == T::zero() {
                    continue;
                }
                let row = &w[i * s.outputs..(i + 1) * s.outputs];
                for (zo, &wio) in z.iter_mut().zip(row) {
                    *zo = *zo + ui * wio;
                }
            }

            tape.inputs.push(std::mem::take(&mut u));
            tape.masks.push(mask);
            if l < hidden {
                let mut h: Vec<T> = z.iter().map(|&v| if v > T::zero() { v } else { slope * v }).collect();
                if l + 1 < hidden {
                    h.extend_from_slice(&idx);
                }
                u = h;
                tape.pre.push(z);
            } else {
                tape.output = z[0];
            }
        }
        tape
    }

    /// Accumulates `dout * d(output)/d(params)` into `grad`.
    fn backprop(&self, cfg: &ModelConfig, tape: &Tape<T>, dout: T, grad: &mut [T]) {
        let slope = T::of(cfg.leaky_slope);
        let mut upstream = vec![dout];
        for (l, s) in self.shapes.iter().enumerate().rev() {
            let dz: Vec<T> = if l == self.shapes.len() - 1 {
                upstream
            } else {
                tape.pre[l]
                    .iter()
                    .zip(&upstream)
                    .map(|(&z, &d)| if z > T::zero() { d } else { d * slope })
                    .collect()
            };
            let u = &tape.inputs[l];
            let (wr, br) = (s.weight_range(), s.bias_range());
            for (g, &d) in grad[br].iter_mut().zip(&dz) {
                *g = *g + d;
            }
            {
                let gw = &mut grad[wr.clone()];
                for (i, &ui) in u.iter().enumerate() {
                    if ui == T::zero() {
                        continue;
                    }
                    for (g, &d) in gw[i * s.outputs..(i + 1) * s.outputs].iter_mut().zip(&dz) {
                        *g = *g + ui * d;
                    }
                }
            }
            if l == 0 {
                break;
            }
            let w = &self.params[wr];
            let prev_width = self.shapes[l - 1].outputs;
            let mut du: Vec<T> = (0..prev_width)
                .map(|i| {
                    w[i * s.outputs..(i + 1) * s.outputs]
                        .iter()
                        .zip(&dz)
                        .fold(T::zero(), |acc, (&wio, &d)| acc + wio * d)
                })
                .collect();
            if let Some(mask) = &tape.masks[l] {
                for (d, &k) in du.iter_mut().zip(mask) {
                    *d = *d * k;
                }
            }
            upstream = du;
        }
    }
}

/// Mean absolute error over `samples` plus `l1 * sum |w|`, evaluated with the
/// same dropout draws [`backward`] would make from an identically seeded RNG.
pub fn objective<T: Scalar, R: Rng + ?Sized>(
    weights: &ModelWeights<T>,
    cfg: &ModelConfig,
    samples: &[Sample<'_, T>],
    l1: T,
    mut dropout: Option<&mut R>,
) -> Result<T> {
    if samples.is_empty() {
        return Err(Error::Data("empty batch".into()));
    }
    let mut total = T::zero();
    for s in samples {
        weights.check(cfg, &s.input)?;
        let out = weights.run(cfg, &s.input, dropout.as_deref_mut()).output;
        total = total + (s.target - out).abs();
    }
    Ok(total / T::of(samples.len() as f64) + l1 * weights.l1_norm())
}

/// Exact gradient of [`objective`]. The absolute value and the L1 penalty
/// use subgradient 0 at their kinks.
pub fn backward<T: Scalar, R: Rng + ?Sized>(
    weights: &ModelWeights<T>,
    cfg: &ModelConfig,
    samples: &[Sample<'_, T>],
    l1: T,
    mut dropout: Option<&mut R>,
) -> Result<Objective<T>> {
    if samples.is_empty() {
        return Err(Error::Data("empty batch".into()));
    }
    let scale = T::one() / T::of(samples.len() as f64);
    let mut grad = vec![T::zero(); weights.len()];
    let mut data_loss = T::zero();
    for s in samples {
        weights.check(cfg, &s.input)?;
        let tape = weights.run(cfg, &s.input, dropout.as_deref_mut());
        let residual = s.target - tape.output;
        data_loss = data_loss + residual.abs();
        weights.backprop(cfg, &tape, -sign(residual) * scale, &mut grad);
    }
    data_loss = data_loss * scale;
    if l1 != T::zero() {
        for s in &weights.shapes {
            for k in s.weight_range() {
                grad[k] = grad[k] + l1 * sign(weights.params[k]);
            }
        }
    }
    for (layer, s) in weights.shapes.iter().enumerate() {
        let range = s.weight_offset..s.bias_offset + s.outputs;
        if grad[range].iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient { layer });
        }
    }
    Ok(Objective {
        loss: data_loss + l1 * weights.l1_norm(),
        data_loss,
        grad,
    })
}
