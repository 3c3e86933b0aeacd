use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    /// `|(y_i - y_j) - f|`
    Relative,
    /// `|y_i - f|`, one comparison frame per input.
    Single,
    /// Relative target shifted by the difference of middle-frame distances.
    MiddleBiased,
}

/// Architecture and loss configuration. Fully determines the parameter layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub feature_dim: usize,
    pub num_refs: usize,
    pub use_indices: bool,
    pub hidden_widths: Vec<usize>,
    pub leaky_slope: f64,
    pub dropout_rate: f64,
    /// When false, the index part of each layer input is never dropped.
    pub drop_index_inputs: bool,
    pub loss_kind: LossKind,
    pub lambda: f64,
    pub i_mf: f64,
}

/// Offsets of one dense layer inside the flat parameter vector. Weights are
/// stored input-major: `w[i * outputs + o]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerShape {
    pub inputs: usize,
    pub outputs: usize,
    pub weight_offset: usize,
    pub bias_offset: usize,
}

impl LayerShape {
    pub fn weight_range(&self) -> std::ops::Range<usize> {
        self.weight_offset..self.weight_offset + self.inputs * self.outputs
    }

    pub fn bias_range(&self) -> std::ops::Range<usize> {
        self.bias_offset..self.bias_offset + self.outputs
    }
}

pub const DEFAULT_HIDDEN_WIDTHS: [usize; 4] = [512, 256, 128, 64];

impl ModelConfig {
    /// Reference configuration: k = 3 reference frames, indices on, relative loss.
    pub fn standard(feature_dim: usize) -> Self {
        Self {
            feature_dim,
            num_refs: 3,
            use_indices: true,
            hidden_widths: DEFAULT_HIDDEN_WIDTHS.to_vec(),
            leaky_slope: 0.01,
            dropout_rate: 0.2,
            drop_index_inputs: true,
            loss_kind: LossKind::Relative,
            lambda: 0.5,
            i_mf: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.feature_dim == 0 {
            return Err(Error::Config("feature_dim must be positive".into()));
        }
        if self.hidden_widths.len() != 4 {
            return Err(Error::Config(format!(
                "expected 4 hidden layers, got {}",
                self.hidden_widths.len()
            )));
        }
        if self.hidden_widths.contains(&0) {
            return Err(Error::Config("hidden widths must be positive".into()));
        }
        if self.hidden_widths.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config(format!(
                "hidden widths must be strictly decreasing, got {:?}",
                self.hidden_widths
            )));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::Config(format!(
                "dropout rate {} outside [0, 1)",
                self.dropout_rate
            )));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!("lambda {} must be nonnegative", self.lambda)));
        }
        if !(0.0..=1.0).contains(&self.i_mf) {
            return Err(Error::Config(format!("i_mf {} outside [0, 1]", self.i_mf)));
        }
        if !self.leaky_slope.is_finite() {
            return Err(Error::Config("leaky slope must be finite".into()));
        }
        Ok(())
    }

    /// Comparison frames in one input: one for the single-frame loss, else two.
    pub fn comparison_frames(&self) -> usize {
        match self.loss_kind {
            LossKind::Single => 1,
            LossKind::Relative | LossKind::MiddleBiased => 2,
        }
    }

    pub fn frames_per_input(&self) -> usize {
        self.comparison_frames() + self.num_refs
    }

    /// Length of the index sub-vector appended to every hidden layer's input.
    pub fn index_len(&self) -> usize {
        if self.use_indices {
            self.frames_per_input()
        } else {
            0
        }
    }

    pub fn layer_shapes(&self) -> Vec<LayerShape> {
        let idx = self.index_len();
        let mut inputs = self.frames_per_input() * self.feature_dim + idx;
        let mut offset = 0;
        let mut shapes = Vec::with_capacity(self.hidden_widths.len() + 1);
        for (l, &outputs) in self.hidden_widths.iter().chain(std::iter::once(&1)).enumerate() {
            if l > 0 {
                inputs = self.hidden_widths[l - 1] + if l < self.hidden_widths.len() { idx } else { 0 };
            }
            let weight_offset = offset;
            let bias_offset = weight_offset + inputs * outputs;
            offset = bias_offset + outputs;
            shapes.push(LayerShape {
                inputs,
                outputs,
                weight_offset,
                bias_offset,
            });
        }
        shapes
    }

    pub fn param_count(&self) -> usize {
        self.layer_shapes().last().map_or(0, |s| s.bias_offset + s.outputs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_layout() {
        let cfg = ModelConfig::standard(10);
        let shapes = cfg.layer_shapes();
        assert_eq!(shapes.len(), 5);
        // 5 frames x 10 features + 5 indices
        assert_eq!(shapes[0].inputs, 55);
        assert_eq!(shapes[1].inputs, 512 + 5);
        assert_eq!(shapes[3].inputs, 128 + 5);
        assert_eq!(shapes[4].inputs, 64);
        assert_eq!(shapes[4].outputs, 1);
        let expected: usize = shapes.iter().map(|s| s.inputs * s.outputs + s.outputs).sum();
        assert_eq!(cfg.param_count(), expected);
    }

    #[test]
    fn single_frame_without_indices() {
        let mut cfg = ModelConfig::standard(4);
        cfg.loss_kind = LossKind::Single;
        cfg.use_indices = false;
        cfg.num_refs = 0;
        assert_eq!(cfg.layer_shapes()[0].inputs, 4);
        assert_eq!(cfg.layer_shapes()[1].inputs, 512);
    }

    #[test]
    fn rejects_non_decreasing_widths() {
        let mut cfg = ModelConfig::standard(4);
        cfg.hidden_widths = vec![8, 8, 4, 2];
        assert!(cfg.validate().is_err());
        cfg.hidden_widths = vec![8, 6, 4];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn rejects_bad_rates() {
        let mut cfg = ModelConfig::standard(4);
        cfg.dropout_rate = 1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = ModelConfig::standard(4);
        cfg.i_mf = 1.5;
        assert!(cfg.validate().is_err());
        let mut cfg = ModelConfig::standard(4);
        cfg.lambda = -0.1;
        assert!(cfg.validate().is_err());
    }
}
