//! Absolute-error losses for the three prediction targets. Each loss is
//! `|target - f|`; only the target differs.

use crate::netcore::{FrameSample, LossKind, ModelConfig, NetInput, Sample};
use crate::Scalar;

/// Two comparison frames, their references and their labels.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingPair<'a, T> {
    pub xi: FrameSample<'a, T>,
    pub xj: FrameSample<'a, T>,
    pub refs: Vec<FrameSample<'a, T>>,
    pub yi: T,
    pub yj: T,
}

/// `lambda * |index - i_mf|`
pub fn middle_distance<T: Scalar>(index: T, lambda: T, i_mf: T) -> T {
    lambda * (index - i_mf).abs()
}

pub fn loss_relative<T: Scalar>(pair: &TrainingPair<'_, T>, f: T) -> T {
    ((pair.yi - pair.yj) - f).abs()
}

pub fn loss_single<T: Scalar>(yi: T, f: T) -> T {
    (yi - f).abs()
}

pub fn loss_middle_biased<T: Scalar>(pair: &TrainingPair<'_, T>, f: T, lambda: T, i_mf: T) -> T {
    (middle_biased_target(pair, lambda, i_mf) - f).abs()
}

fn middle_biased_target<T: Scalar>(pair: &TrainingPair<'_, T>, lambda: T, i_mf: T) -> T {
    let di = middle_distance(pair.xi.index, lambda, i_mf);
    let dj = middle_distance(pair.xj.index, lambda, i_mf);
    (pair.yi - pair.yj) - (di - dj)
}

/// The value the network output is regressed onto under `cfg.loss_kind`.
pub fn target<T: Scalar>(cfg: &ModelConfig, pair: &TrainingPair<'_, T>) -> T {
    match cfg.loss_kind {
        LossKind::Relative => pair.yi - pair.yj,
        LossKind::Single => pair.yi,
        LossKind::MiddleBiased => middle_biased_target(pair, T::of(cfg.lambda), T::of(cfg.i_mf)),
    }
}

pub fn loss<T: Scalar>(cfg: &ModelConfig, pair: &TrainingPair<'_, T>, f: T) -> T {
    match cfg.loss_kind {
        LossKind::Relative => loss_relative(pair, f),
        LossKind::Single => loss_single(pair.yi, f),
        LossKind::MiddleBiased => loss_middle_biased(pair, f, T::of(cfg.lambda), T::of(cfg.i_mf)),
    }
}

impl<'a, T: Scalar> TrainingPair<'a, T> {
    /// Network input for this pair; the single-frame loss drops `xj`.
    pub fn input(&self, kind: LossKind) -> NetInput<'a, T> {
        NetInput {
            xi: self.xi,
            xj: (kind != LossKind::Single).then_some(self.xj),
            refs: self.refs.clone(),
        }
    }

    pub fn sample(&self, cfg: &ModelConfig) -> Sample<'a, T> {
        Sample {
            input: self.input(cfg.loss_kind),
            target: target(cfg, self),
        }
    }
}
