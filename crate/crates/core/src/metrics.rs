//! Region similarity (Jaccard), contour accuracy (boundary F-measure) and
//! performance labels derived from a frame-by-frame J+F matrix.

use crate::ingest::{LabelTable, Mask, PerformanceMatrix};
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameScore {
    pub j: f64,
    pub f: f64,
    pub jf: f64,
}

fn check_shape(m: &Mask, g: &Mask) -> Result<()> {
    if !m.same_shape(g) {
        return Err(Error::Shape(format!(
            "mask {}x{} vs ground truth {}x{}",
            m.width(),
            m.height(),
            g.width(),
            g.height()
        )));
    }
    Ok(())
}

/// `|M ∩ G| / |M ∪ G|`; two empty masks score 1.
pub fn jaccard(m: &Mask, g: &Mask) -> Result<f64> {
    check_shape(m, g)?;
    let (mut inter, mut union) = (0usize, 0usize);
    for (&a, &b) in m.pixels().iter().zip(g.pixels()) {
        inter += (a && b) as usize;
        union += (a || b) as usize;
    }
    if union == 0 {
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}

/// Foreground pixels with a 4-neighbour that is background or off-image.
pub fn boundary(m: &Mask) -> Mask {
    let (w, h) = (m.width(), m.height());
    Mask::from_fn(w, h, |x, y| {
        m.get(x, y)
            && (x == 0
                || y == 0
                || x + 1 == w
                || y + 1 == h
                || !m.get(x - 1, y)
                || !m.get(x + 1, y)
                || !m.get(x, y - 1)
                || !m.get(x, y + 1))
    })
    .expect("same dimensions as a valid mask")
}

/// Dilation by a closed Euclidean disc of radius `radius`.
pub fn dilate_disc(m: &Mask, radius: f64) -> Mask {
    let r = radius.floor() as isize;
    let r2 = radius * radius;
    let offsets: Vec<(isize, isize)> = (-r..=r)
        .flat_map(|dy| (-r..=r).map(move |dx| (dx, dy)))
        .filter(|&(dx, dy)| ((dx * dx + dy * dy) as f64) <= r2)
        .collect();
    let (w, h) = (m.width() as isize, m.height() as isize);
    let mut out = vec![false; m.pixels().len()];
    for y in 0..h {
        for x in 0..w {
            if !m.get(x as usize, y as usize) {
                continue;
            }
            for &(dx, dy) in &offsets {
                let (nx, ny) = (x + dx, y + dy);
                if nx >= 0 && ny >= 0 && nx < w && ny < h {
                    out[(ny * w + nx) as usize] = true;
                }
            }
        }
    }
    Mask::new(m.width(), m.height(), out).expect("same dimensions as a valid mask")
}

/// `ceil(0.008 * diagonal)`, the customary contour tolerance.
pub fn default_tolerance(width: usize, height: usize) -> f64 {
    (0.008 * ((width * width + height * height) as f64).sqrt()).ceil()
}

/// Boundary F-measure. A boundary pixel counts as matched when a boundary
/// pixel of the other mask lies within Euclidean distance `tol`.
pub fn boundary_f(m: &Mask, g: &Mask, tol: f64) -> Result<f64> {
    check_shape(m, g)?;
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::Data(format!("tolerance {tol} must be a nonnegative number")));
    }
    let (bm, bg) = (boundary(m), boundary(g));
    let (nm, ng) = (bm.count(), bg.count());
    match (nm, ng) {
        (0, 0) => return Ok(1.0),
        (0, _) | (_, 0) => return Ok(0.0),
        _ => {}
    }
    let (dm, dg) = (dilate_disc(&bm, tol), dilate_disc(&bg, tol));
    let hits = |a: &Mask, b: &Mask| a.pixels().iter().zip(b.pixels()).filter(|(&p, &q)| p && q).count();
    let precision = hits(&bm, &dg) as f64 / nm as f64;
    let recall = hits(&bg, &dm) as f64 / ng as f64;
    if precision + recall == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * precision * recall / (precision + recall))
}

pub fn frame_score(m: &Mask, g: &Mask, tol: f64) -> Result<FrameScore> {
    let j = jaccard(m, g)?;
    let f = boundary_f(m, g, tol)?;
    Ok(FrameScore { j, f, jf: j + f })
}

/// Row means of a square performance matrix: `y_i = (1/n) sum_j P[i][j]`.
pub fn label_vector<T: Scalar, R: AsRef<[T]>>(rows: &[R]) -> Result<Vec<T>> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::Shape("empty performance matrix".into()));
    }
    rows.iter()
        .map(|r| {
            let r = r.as_ref();
            if r.len() != n {
                return Err(Error::Shape(format!("row of length {} in a {n}-row matrix", r.len())));
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::Data("non-finite performance value".into()));
            }
            Ok(r.iter().copied().sum::<T>() / T::of(n as f64))
        })
        .collect()
}

/// Converts every matrix into its label vector.
pub fn labels_from_matrix(matrix: &PerformanceMatrix) -> Result<LabelTable> {
    let mut table = LabelTable::new();
    for (key, entry) in matrix.iter() {
        let rows: Vec<&[f64]> = (0..entry.n()).map(|i| entry.row(i)).collect();
        table.insert(key.clone(), label_vector(&rows)?)?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn square(n: usize, x0: usize, y0: usize, s: usize) -> Mask {
        Mask::from_fn(n, n, |x, y| x >= x0 && x < x0 + s && y >= y0 && y < y0 + s).unwrap()
    }

    #[test]
    fn jaccard_identity_and_disjoint() {
        let a = square(8, 1, 1, 3);
        assert_eq!(jaccard(&a, &a).unwrap(), 1.0);
        assert_eq!(jaccard(&a, &square(8, 5, 5, 2)).unwrap(), 0.0);
    }

    #[test]
    fn jaccard_half_of_four_by_four() {
        let g = Mask::from_fn(4, 4, |_, _| true).unwrap();
        let m = Mask::from_fn(4, 4, |x, _| x < 2).unwrap();
        assert_eq!(jaccard(&m, &g).unwrap(), 0.5);
    }

    #[test]
    fn empty_conventions() {
        let e = Mask::empty(6, 6).unwrap();
        let a = square(6, 1, 1, 2);
        assert_eq!(jaccard(&e, &e).unwrap(), 1.0);
        assert_eq!(jaccard(&e, &a).unwrap(), 0.0);
        assert_eq!(boundary_f(&e, &e, 1.0).unwrap(), 1.0);
        assert_eq!(boundary_f(&a, &e, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(jaccard(&Mask::empty(2, 2).unwrap(), &Mask::empty(3, 2).unwrap()).is_err());
        assert!(boundary_f(&Mask::empty(2, 2).unwrap(), &Mask::empty(2, 3).unwrap(), 1.0).is_err());
    }

    #[test]
    fn boundary_of_square_is_its_ring() {
        let b = boundary(&square(7, 1, 1, 5));
        assert_eq!(b.count(), 16);
        assert!(!b.get(3, 3));
        // foreground touching the border is boundary
        let full = Mask::from_fn(3, 3, |_, _| true).unwrap();
        assert_eq!(boundary(&full).count(), 8);
    }

    #[test]
    fn boundary_f_identity_and_far_apart() {
        let a = square(32, 4, 4, 10);
        assert_eq!(boundary_f(&a, &a, 0.0).unwrap(), 1.0);
        assert_eq!(boundary_f(&a, &a, 3.0).unwrap(), 1.0);
        let tl = square(32, 0, 0, 5);
        let br = square(32, 27, 27, 5);
        assert_eq!(boundary_f(&tl, &br, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn default_tolerance_values() {
        // 854x480 frames: diagonal ~979.6 -> 7.84 -> 8
        assert_eq!(default_tolerance(854, 480), 8.0);
        assert_eq!(default_tolerance(16, 16), 1.0);
    }

    #[test]
    fn label_vector_row_constants() {
        let ones = vec![vec![1.0f64; 3]; 3];
        assert_eq!(label_vector(&ones).unwrap(), vec![1.0, 1.0, 1.0]);
        let rows = vec![vec![0.0f64; 3], vec![1.0; 3], vec![2.0; 3]];
        assert_eq!(label_vector(&rows).unwrap(), vec![0.0, 1.0, 2.0]);
        assert!(label_vector(&[vec![1.0f64, 2.0]]).is_err());
    }

    #[test]
    fn label_vector_matches_elementwise_mean() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let rows: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..5).map(|_| rng.random_range(0.0..2.0)).collect())
            .collect();
        let y = label_vector(&rows).unwrap();
        for (yi, r) in y.iter().zip(&rows) {
            let oracle = r.iter().fold(0.0, |acc, v| acc + v / 5.0);
            assert!((yi - oracle).abs() < 1e-12);
        }
    }

    fn random_mask(seed: u64, n: usize) -> Mask {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let (cx, cy, r) = (
            rng.random_range(0..n),
            rng.random_range(0..n),
            rng.random_range(1..n / 2),
        );
        Mask::from_fn(n, n, |x, y| {
            let d = (x as isize - cx as isize).pow(2) + (y as isize - cy as isize).pow(2);
            d <= (r * r) as isize || rng_free_noise(seed, x, y)
        })
        .unwrap()
    }

    fn rng_free_noise(seed: u64, x: usize, y: usize) -> bool {
        (seed.wrapping_mul(31).wrapping_add((x * 131 + y * 17) as u64)).is_multiple_of(23)
    }

    proptest! {
        #[test]
        fn jaccard_is_symmetric(a in 0u64..500, b in 0u64..500) {
            let (m, g) = (random_mask(a, 12), random_mask(b, 12));
            prop_assert_eq!(jaccard(&m, &g).unwrap(), jaccard(&g, &m).unwrap());
        }

        #[test]
        fn boundary_f_monotone_in_tolerance(a in 0u64..500, b in 0u64..500, t in 0.0f64..4.0) {
            let (m, g) = (random_mask(a, 12), random_mask(b, 12));
            let lo = boundary_f(&m, &g, t).unwrap();
            let hi = boundary_f(&m, &g, t + 0.5).unwrap();
            prop_assert!(hi >= lo);
        }

        #[test]
        fn label_vector_commutes_with_scaling(c in 0.0f64..3.0, seed in any::<u64>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let rows: Vec<Vec<f64>> = (0..4).map(|_| (0..4).map(|_| rng.random_range(0.0..2.0)).collect()).collect();
            let scaled: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| c * v).collect()).collect();
            let y = label_vector(&rows).unwrap();
            for (a, b) in label_vector(&scaled).unwrap().iter().zip(&y) {
                prop_assert!((a - c * b).abs() < 1e-12);
            }
        }
    }
}
