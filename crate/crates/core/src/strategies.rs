//! Baseline and oracle annotation-frame choices.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    First,
    /// 0-based `n / 2` (floor division).
    Middle,
    Last,
    Random,
    /// Oracle: highest label, lowest index on ties.
    Best,
    /// Oracle: lowest label, lowest index on ties.
    Worst,
    /// Deep bubble sort with a trained model; resolved by the harness.
    Bn,
}

impl Strategy {
    pub const ALL: [Strategy; 7] = [
        Strategy::First,
        Strategy::Middle,
        Strategy::Last,
        Strategy::Random,
        Strategy::Best,
        Strategy::Worst,
        Strategy::Bn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::First => "first",
            Strategy::Middle => "middle",
            Strategy::Last => "last",
            Strategy::Random => "random",
            Strategy::Best => "best",
            Strategy::Worst => "worst",
            Strategy::Bn => "bn",
        }
    }

    pub fn needs_labels(self) -> bool {
        matches!(self, Strategy::Best | Strategy::Worst)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown strategy `{s}`")))
    }
}

fn arg_extreme(y: &[f64], better: impl Fn(f64, f64) -> bool) -> usize {
    let mut best = 0;
    for (i, &v) in y.iter().enumerate().skip(1) {
        if better(v, y[best]) {
            best = i;
        }
    }
    best
}

/// Frame chosen by `strategy` for an `n`-frame video.
pub fn select<R: Rng + ?Sized>(
    strategy: Strategy,
    n: usize,
    labels: Option<&[f64]>,
    rng: Option<&mut R>,
) -> Result<usize> {
    if n == 0 {
        return Err(Error::Data("video has no frames".into()));
    }
    let labels_for = |s: Strategy| -> Result<&[f64]> {
        let y = labels.ok_or_else(|| Error::Config(format!("strategy {s} needs performance labels")))?;
        if y.len() != n {
            return Err(Error::Shape(format!("{} labels for {n} frames", y.len())));
        }
        Ok(y)
    };
    Ok(match strategy {
        Strategy::First => 0,
        Strategy::Middle => n / 2,
        Strategy::Last => n - 1,
        Strategy::Random => rng
            .ok_or_else(|| Error::Config("strategy random needs an RNG".into()))?
            .random_range(0..n),
        Strategy::Best => arg_extreme(labels_for(strategy)?, |a, b| a > b),
        Strategy::Worst => arg_extreme(labels_for(strategy)?, |a, b| a < b),
        Strategy::Bn => {
            return Err(Error::Config(
                "strategy bn needs a trained model; run it through the benchmark harness".into(),
            ))
        }
    })
}
