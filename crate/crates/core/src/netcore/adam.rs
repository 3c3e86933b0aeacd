use crate::Scalar;

/// Adam moment estimates for a flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    m: Vec<T>,
    v: Vec<T>,
    t: u64,
    beta1: T,
    beta2: T,
    eps: T,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(len: usize) -> Self {
        Self::with_moments(len, T::of(0.9), T::of(0.999), T::of(1e-8))
    }

    pub fn with_moments(len: usize, beta1: T, beta2: T, eps: T) -> Self {
        Self {
            m: vec![T::zero(); len],
            v: vec![T::zero(); len],
            t: 0,
            beta1,
            beta2,
            eps,
        }
    }

    pub fn timestep(&self) -> u64 {
        self.t
    }

    pub fn step(&mut self, params: &mut [T], grad: &[T], lr: T) {
        assert_eq!(
            params.len(),
            self.m.len(),
            "parameter count changed under the optimizer"
        );
        assert_eq!(grad.len(), self.m.len());
        self.t += 1;
        let one = T::one();
        let t = self.t as i32;
        let correction1 = one - self.beta1.powi(t);
        let correction2 = one - self.beta2.powi(t);
        for (((p, &g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = self.beta1 * *m + (one - self.beta1) * g;
            *v = self.beta2 * *v + (one - self.beta2) * g * g;
            let m_hat = *m / correction1;
            let v_hat = *v / correction2;
            *p = *p - lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Straight transcription of the published update, kept apart from the
    /// vectorised implementation above.
    fn reference_adam(p0: f64, grads: &[f64], lr: f64) -> f64 {
        let (b1, b2, eps) = (0.9f64, 0.999f64, 1e-8f64);
        let (mut m, mut v, mut p) = (0.0, 0.0, p0);
        for (i, g) in grads.iter().enumerate() {
            let t = (i + 1) as f64;
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            let mh = m / (1.0 - b1.powf(t));
            let vh = v / (1.0 - b2.powf(t));
            p -= lr * mh / (vh.sqrt() + eps);
        }
        p
    }

    #[test]
    fn zero_gradient_leaves_weights() {
        let mut p = vec![0.3f64, -1.2, 4.0];
        let before = p.clone();
        let mut s = AdamState::new(3);
        s.step(&mut p, &[0.0; 3], 1e-3);
        assert_eq!(p, before);
    }

    #[test]
    fn one_step_matches_reference() {
        let grads = [0.7f64, -2.5, 1e-3];
        let mut p = vec![0.1f64, 0.2, 0.3];
        let mut s = AdamState::new(3);
        s.step(&mut p, &grads, 1e-3);
        for (k, &g) in grads.iter().enumerate() {
            let want = reference_adam([0.1, 0.2, 0.3][k], &[g], 1e-3);
            assert!((p[k] - want).abs() < 1e-15, "{} vs {want}", p[k]);
            // first step moves by ~lr against the gradient sign
            assert!(((p[k] - [0.1, 0.2, 0.3][k]) + 1e-3 * g.signum()).abs() < 1e-7);
        }
    }

    #[test]
    fn opposite_steps_return_near_start() {
        let mut p = vec![0.5f64];
        let mut s = AdamState::new(1);
        s.step(&mut p, &[1.0], 1e-3);
        s.step(&mut p, &[-1.0], 1e-3);
        let want = reference_adam(0.5, &[1.0, -1.0], 1e-3);
        assert!((p[0] - want).abs() < 1e-15);
        assert!((p[0] - 0.5).abs() < 2e-3);
    }

    #[test]
    fn f32_tracks_f64() {
        let mut p32 = vec![0.25f32];
        let mut s32 = AdamState::<f32>::new(1);
        for g in [0.3f32, 0.1, -0.2] {
            s32.step(&mut p32, &[g], 1e-3);
        }
        let want = reference_adam(0.25, &[0.3, 0.1, -0.2], 1e-3);
        assert!((p32[0] as f64 - want).abs() < 1e-6);
    }
}
