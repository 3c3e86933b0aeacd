//! Annotation-frame selection for semi-supervised video object segmentation.
//!
//! A small fully-connected network is trained to predict the *relative*
//! segmentation quality of two frames of the same video, given a few random
//! reference frames for context. At selection time the predictor is used as
//! a noisy comparator inside a batched bubble sort, and the frame that ends up
//! on top of the list is proposed for annotation.
//!
//! The numerical core ([`netcore`], [`losses`], [`harness::stats`]) is generic
//! over the scalar type; the aliases below pin the common instantiations.

pub mod error;
pub mod harness;
pub mod ingest;
pub mod losses;
pub mod metrics;
pub mod netcore;
pub mod scalar;
pub mod sorter;
pub mod strategies;
pub mod trainer;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Network weights in the precision checkpoints are stored in.
pub type Weights = netcore::ModelWeights<f32>;
/// Double-precision weights, used for gradient verification.
pub type Weights64 = netcore::ModelWeights<f64>;
/// Per-frame features as decoded from disk.
pub type Features = ingest::VideoFeatures<f32>;
/// Adam optimizer state matching [`Weights`].
pub type Adam = netcore::AdamState<f32>;
