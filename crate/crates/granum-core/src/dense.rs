//! Fully connected layer: y = act(W x + b).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::activations::Activation;
use crate::error::{Error, Result};
use crate::math;
use crate::rng::RandomSource;
use crate::tensor::Tensor;

#[derive(Debug, Clone)]
pub struct DenseLayer {
    pub(crate) w: Tensor, // out x in
    pub(crate) b: Tensor, // out
    pub(crate) activation: Activation,
    pub(crate) dw: Tensor,
    pub(crate) db: Tensor,
    cache: Option<DenseCache>,
}

#[derive(Debug, Clone)]
struct DenseCache {
    input: Vec<f64>,
    pre: Vec<f64>,
}

/// Glorot-uniform limit for a weight matrix.
pub(crate) fn glorot_limit(fan_in: usize, fan_out: usize) -> f64 {
    math::sqrt(6.0 / (fan_in + fan_out) as f64)
}

impl DenseLayer {
    /// Glorot-uniform weights, zero biases.
    pub fn new(
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        rng: &mut RandomSource,
    ) -> Result<DenseLayer> {
        let limit = glorot_limit(in_dim, out_dim);
        let w = rng.uniform(&[out_dim, in_dim], -limit, limit)?;
        let b = Tensor::zeros(&[out_dim])?;
        DenseLayer::from_parts(w, b, activation)
    }

    pub fn from_parts(w: Tensor, b: Tensor, activation: Activation) -> Result<DenseLayer> {
        if w.rank() != 2 || b.rank() != 1 || b.len() != w.rows() {
            return Err(Error::Shape(format!(
                "dense parts disagree: weights {:?}, bias {:?}",
                w.shape(),
                b.shape()
            )));
        }
        let dw = Tensor::zeros(w.shape())?;
        let db = Tensor::zeros(b.shape())?;
        Ok(DenseLayer { w, b, activation, dw, db, cache: None })
    }

    pub fn in_dim(&self) -> usize {
        self.w.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.w.rows()
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weights(&self) -> &Tensor {
        &self.w
    }

    pub fn bias(&self) -> &Tensor {
        &self.b
    }

    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        if input != [self.in_dim()] {
            return Err(Error::Shape(format!(
                "dense expects input [{}], got {input:?}",
                self.in_dim()
            )));
        }
        Ok(vec![self.out_dim()])
    }

    fn pre_activation(&self, x: &Tensor) -> Result<Vec<f64>> {
        if x.shape() != [self.in_dim()] {
            return Err(Error::Shape(format!(
                "dense expects input [{}], got {:?}",
                self.in_dim(),
                x.shape()
            )));
        }
        let (out_dim, in_dim) = (self.out_dim(), self.in_dim());
        let mut pre = vec![0.0; out_dim];
        let xv = x.data();
        for o in 0..out_dim {
            let row = &self.w.data()[o * in_dim..(o + 1) * in_dim];
            let mut acc = self.b.data()[o];
            for (wi, xi) in row.iter().zip(xv) {
                acc += wi * xi;
            }
            pre[o] = acc;
        }
        Ok(pre)
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let pre = self.pre_activation(x)?;
        let data = pre.iter().map(|&v| self.activation.apply(v)).collect();
        Tensor::from_vec(&[self.out_dim()], data)
    }

    pub fn forward_train(&mut self, x: &Tensor) -> Result<Tensor> {
        let pre = self.pre_activation(x)?;
        let data: Vec<f64> = pre.iter().map(|&v| self.activation.apply(v)).collect();
        self.cache = Some(DenseCache { input: x.data().to_vec(), pre });
        Tensor::from_vec(&[self.out_dim()], data)
    }

    /// Accumulates dW and db, returns the gradient w.r.t. the input.
    pub fn backward(&mut self, dy: &Tensor) -> Result<Tensor> {
        let cache = self
            .cache
            .as_ref()
            .ok_or_else(|| Error::Config("dense backward called before forward".into()))?;
        if dy.shape() != [self.out_dim()] {
            return Err(Error::Shape(format!(
                "dense backward expects gradient [{}], got {:?}",
                self.out_dim(),
                dy.shape()
            )));
        }
        let (out_dim, in_dim) = (self.out_dim(), self.in_dim());
        let mut dx = vec![0.0; in_dim];
        for o in 0..out_dim {
            let dpre = dy.data()[o] * self.activation.prime(cache.pre[o]);
            self.db.data_mut()[o] += dpre;
            let wrow = &self.w.data()[o * in_dim..(o + 1) * in_dim];
            let grow = &mut self.dw.data_mut()[o * in_dim..(o + 1) * in_dim];
            for i in 0..in_dim {
                grow[i] += dpre * cache.input[i];
                dx[i] += dpre * wrow[i];
            }
        }
        Tensor::from_vec(&[in_dim], dx)
    }

    pub fn zero_grads(&mut self) {
        self.dw.fill(0.0);
        self.db.fill(0.0);
    }

    pub(crate) fn clear_cache(&mut self) {
        self.cache = None;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_weights_pass_through() {
        let w = Tensor::eye(2).unwrap();
        let b = Tensor::zeros(&[2]).unwrap();
        let layer = DenseLayer::from_parts(w, b, Activation::Identity).unwrap();
        let x = Tensor::from_vec(&[2], vec![3.0, 7.0]).unwrap();
        assert_eq!(layer.forward(&x).unwrap().data(), &[3.0, 7.0]);
    }

    #[test]
    fn hand_evaluated_output() {
        let w = Tensor::from_vec(&[1, 2], vec![1.0, 2.0]).unwrap();
        let b = Tensor::from_vec(&[1], vec![1.0]).unwrap();
        let layer = DenseLayer::from_parts(w, b, Activation::Identity).unwrap();
        let x = Tensor::from_vec(&[2], vec![3.0, 4.0]).unwrap();
        assert_eq!(layer.forward(&x).unwrap().data(), &[12.0]);
    }

    #[test]
    fn rejects_wrong_input_length() {
        let mut rng = RandomSource::new(1);
        let layer = DenseLayer::new(3, 2, Activation::Identity, &mut rng).unwrap();
        let x = Tensor::from_vec(&[2], vec![1.0, 2.0]).unwrap();
        assert!(matches!(layer.forward(&x), Err(Error::Shape(_))));
    }

    #[test]
    fn backward_matches_outer_product() {
        let w = Tensor::from_vec(&[2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = Tensor::zeros(&[2]).unwrap();
        let mut layer = DenseLayer::from_parts(w, b, Activation::Identity).unwrap();
        let x = Tensor::from_vec(&[2], vec![5.0, 6.0]).unwrap();
        layer.forward_train(&x).unwrap();
        let dy = Tensor::from_vec(&[2], vec![1.0, 10.0]).unwrap();
        let dx = layer.backward(&dy).unwrap();
        // dW = dy ⊗ x, db = dy, dx = W^T dy
        assert_eq!(layer.dw.data(), &[5.0, 6.0, 50.0, 60.0]);
        assert_eq!(layer.db.data(), &[1.0, 10.0]);
        assert_eq!(dx.data(), &[1.0 + 30.0, 2.0 + 40.0]);
    }
}
