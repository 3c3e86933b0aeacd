//! The relative-performance prediction head: four Leaky-ReLU dense layers
//! that each see the normalized frame indices, input dropout on layers 2-4,
//! and a single linear output neuron. Gradients are computed by hand.

mod adam;
mod config;
mod network;

pub use adam::AdamState;
pub use config::{LayerShape, LossKind, ModelConfig};
pub use network::{backward, normalized_index, objective, FrameSample, ModelWeights, NetInput, Objective, Sample};
