//! Dataset-wide evaluation of selection strategies, the batch-size ablation
//! and synthetic datasets for desk-scale experiments.

pub mod benchmark;
pub mod stats;
pub mod synth;

pub use benchmark::{
    ablate_batch, benchmark, load_scores, save_scores, save_summary, AblationRow, ObjectScore, StrategyReport,
    TrainedModel,
};
pub use stats::{cov, median, summarize, Summary};
pub use synth::{generate, make_synthetic, LabelModel, SyntheticData, SyntheticOutput, SyntheticSpec};
