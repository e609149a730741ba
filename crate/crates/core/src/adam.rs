//! Adam optimizer in gradient-ascent form.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Adam state for one flat parameter vector. Moment decay rates and the
/// denominator epsilon use the customary defaults; the learning rate is
/// passed per update so schedules stay in the caller's hands.
#[derive(Clone, Debug, PartialEq)]
pub struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
}

impl Adam {
    pub fn new(dim: usize) -> Self {
        Self { m: vec![0.0; dim], v: vec![0.0; dim], t: 0, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }

    /// Number of updates applied so far.
    pub fn steps(&self) -> u64 {
        self.t
    }

    /// Applies one bias-corrected update, moving `params` *along* the
    /// gradient (ascent).
    pub fn step(&mut self, params: &mut [f64], grad: &[f64], learning_rate: f64) {
        assert_eq!(params.len(), self.m.len(), "parameter dimension mismatch");
        assert_eq!(grad.len(), self.m.len(), "gradient dimension mismatch");
        self.t += 1;
        let c1 = 1.0 - math::pow(self.beta1, self.t as f64);
        let c2 = 1.0 - math::pow(self.beta2, self.t as f64);
        for ((p, g), (m, v)) in
            params.iter_mut().zip(grad).zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p += learning_rate * m_hat / (math::sqrt(v_hat) + self.epsilon);
        }
    }
}
