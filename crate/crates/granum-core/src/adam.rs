//! Adam optimizer with bias correction.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::network::Network;
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { learning_rate: 0.001, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// First/second moment buffers plus the step counter. One state drives one
/// network; slots are keyed by the network's parameter order.
#[derive(Debug, Clone)]
pub struct AdamState {
    cfg: AdamConfig,
    t: u64,
    beta1_t: f64,
    beta2_t: f64,
    moments: Vec<Moment>,
}

#[derive(Debug, Clone)]
struct Moment {
    m: Tensor,
    v: Tensor,
}

impl AdamState {
    pub fn new(cfg: AdamConfig) -> AdamState {
        AdamState { cfg, t: 0, beta1_t: 1.0, beta2_t: 1.0, moments: Vec::new() }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    fn begin_step(&mut self) {
        self.t += 1;
        self.beta1_t *= self.cfg.beta1;
        self.beta2_t *= self.cfg.beta2;
    }

    fn update_slot(&mut self, slot: usize, param: &mut Tensor, grad: &Tensor) -> Result<()> {
        if param.shape() != grad.shape() {
            return Err(Error::Shape(format!(
                "adam gradient shape {:?} does not match parameter {:?}",
                grad.shape(),
                param.shape()
            )));
        }
        if slot == self.moments.len() {
            self.moments.push(Moment {
                m: Tensor::zeros(param.shape())?,
                v: Tensor::zeros(param.shape())?,
            });
        }
        let moment = self
            .moments
            .get_mut(slot)
            .ok_or_else(|| Error::Config("adam slots visited out of order".into()))?;
        if moment.m.shape() != param.shape() {
            return Err(Error::Shape(format!(
                "adam moment shape {:?} does not match parameter {:?}",
                moment.m.shape(),
                param.shape()
            )));
        }
        let (b1, b2) = (self.cfg.beta1, self.cfg.beta2);
        let bc1 = 1.0 - self.beta1_t;
        let bc2 = 1.0 - self.beta2_t;
        let lr = self.cfg.learning_rate;
        let eps = self.cfg.epsilon;
        let ms = moment.m.data_mut();
        let vs = moment.v.data_mut();
        let ps = param.data_mut();
        let gs = grad.data();
        for k in 0..ps.len() {
            let g = gs[k];
            ms[k] = b1 * ms[k] + (1.0 - b1) * g;
            vs[k] = b2 * vs[k] + (1.0 - b2) * g * g;
            let m_hat = ms[k] / bc1;
            let v_hat = vs[k] / bc2;
            ps[k] -= lr * m_hat / (math::sqrt(v_hat) + eps);
        }
        Ok(())
    }

    /// One optimizer step over every parameter of `net` using its currently
    /// accumulated gradients.
    pub fn step_network(&mut self, net: &mut Network) -> Result<()> {
        self.begin_step();
        let mut slot = 0usize;
        let mut failure: Option<Error> = None;
        net.visit_params_grads(&mut |p, g| {
            if failure.is_none() {
                if let Err(e) = self.update_slot(slot, p, g) {
                    failure = Some(e);
                }
            }
            slot += 1;
        });
        match failure {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// One step over a single free-standing parameter (slot 0); used by
    /// tests and micro-benchmarks.
    pub fn step_single(&mut self, param: &mut Tensor, grad: &Tensor) -> Result<()> {
        self.begin_step();
        self.update_slot(0, param, grad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn first_step_hand_value() {
        let mut state = AdamState::new(AdamConfig::default());
        let mut p = Tensor::from_vec(&[1], vec![0.0]).unwrap();
        let g = Tensor::from_vec(&[1], vec![1.0]).unwrap();
        state.step_single(&mut p, &g).unwrap();
        // m_hat = 1, v_hat = 1 -> delta = -lr / (1 + eps)
        let expected = -0.001 / (1.0 + 1e-8);
        assert!((p.data()[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn zero_gradient_is_fixed_point() {
        let mut state = AdamState::new(AdamConfig::default());
        let mut p = Tensor::from_vec(&[3], vec![1.0, -2.0, 0.5]).unwrap();
        let g = Tensor::zeros(&[3]).unwrap();
        let before = p.clone();
        for _ in 0..10 {
            state.step_single(&mut p, &g).unwrap();
        }
        assert!(p.bits_eq(&before));
    }

    #[test]
    fn first_step_magnitude_tracks_lr() {
        // |delta| = lr * |g| / (|g| + eps) on the first step, for any g.
        for &g_val in &[1e-3, 1.0, 1e3] {
            let mut state = AdamState::new(AdamConfig::default());
            let mut p = Tensor::from_vec(&[1], vec![0.0]).unwrap();
            let g = Tensor::from_vec(&[1], vec![g_val]).unwrap();
            state.step_single(&mut p, &g).unwrap();
            let expected = 0.001 * g_val / (g_val + 1e-8);
            assert!(
                (p.data()[0].abs() - expected).abs() < 1e-12,
                "g={g_val}: got {}, expected {expected}",
                p.data()[0].abs()
            );
        }
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mut state = AdamState::new(AdamConfig::default());
        let mut p = Tensor::zeros(&[2]).unwrap();
        let g = Tensor::zeros(&[3]).unwrap();
        assert!(matches!(state.step_single(&mut p, &g), Err(Error::Shape(_))));
    }
}
