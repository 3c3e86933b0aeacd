use crate::{Error, Result, Scalar};

/// Per-object score statistics as reported for each strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary<T> {
    pub count: usize,
    pub mean: T,
    pub median: T,
    pub min: T,
    pub max: T,
    /// Population standard deviation over the mean; `None` unless mean > 0.
    pub coefficient_of_variation: Option<T>,
}

/// Neumaier-compensated sum, exact whenever the true partial sums are
/// representable.
fn sum<T: Scalar>(xs: impl Iterator<Item = T>) -> T {
    let (mut s, mut c) = (T::zero(), T::zero());
    for x in xs {
        let t = s + x;
        c = c + if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
        s = t;
    }
    s + c
}

/// Mean and population variance. Two passes keep dyadic inputs (quarters,
/// halves) exact, so hand-computed tables reproduce bit for bit.
fn mean_var<T: Scalar>(xs: &[T]) -> (T, T) {
    let n = T::of(xs.len() as f64);
    let mean = sum(xs.iter().copied()) / n;
    let var = sum(xs.iter().map(|&x| (x - mean) * (x - mean))) / n;
    (mean, var)
}

pub fn median<T: Scalar>(xs: &[T]) -> Option<T> {
    if xs.is_empty() {
        return None;
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("scores are finite"));
    let mid = sorted.len() / 2;
    Some(if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / T::of(2.0)
    })
}

pub fn cov<T: Scalar>(xs: &[T]) -> Option<T> {
    if xs.is_empty() {
        return None;
    }
    let (mean, var) = mean_var(xs);
    (mean > T::zero()).then(|| var.sqrt() / mean)
}

pub fn summarize<T: Scalar>(xs: &[T]) -> Result<Summary<T>> {
    if xs.is_empty() {
        return Err(Error::Data("no scores to summarize".into()));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::Data("non-finite score".into()));
    }
    let (mean, var) = mean_var(xs);
    Ok(Summary {
        count: xs.len(),
        mean,
        median: median(xs).expect("nonempty"),
        min: xs.iter().copied().fold(T::infinity(), T::min),
        max: xs.iter().copied().fold(T::neg_infinity(), T::max),
        coefficient_of_variation: (mean > T::zero()).then(|| var.sqrt() / mean),
    })
}
