//! Structural layers: flatten, repeat-vector, and time-distributed dense.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::activations::Activation;
use crate::dense::glorot_limit;
use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::tensor::Tensor;

/// Collapses any input to a 1-D vector.
#[derive(Debug, Clone, Default)]
pub struct FlattenLayer {
    cache_shape: Option<Vec<usize>>,
}

impl FlattenLayer {
    pub fn new() -> FlattenLayer {
        FlattenLayer { cache_shape: None }
    }

    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        Ok(vec![input.iter().product()])
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        x.reshaped(&[x.len()])
    }

    pub fn forward_train(&mut self, x: &Tensor) -> Result<Tensor> {
        self.cache_shape = Some(x.shape().to_vec());
        self.forward(x)
    }

    pub fn backward(&mut self, dy: &Tensor) -> Result<Tensor> {
        let shape = self
            .cache_shape
            .as_ref()
            .ok_or_else(|| Error::Config("flatten backward called before forward".into()))?;
        dy.reshaped(shape)
    }

    pub(crate) fn clear_cache(&mut self) {
        self.cache_shape = None;
    }
}

/// Tiles a vector n times into an (n x len) matrix. The decoder half of the
/// encoder-decoder models consumes the encoder state once per output day.
#[derive(Debug, Clone)]
pub struct RepeatVectorLayer {
    pub(crate) repeats: usize,
    cache_len: Option<usize>,
}

impl RepeatVectorLayer {
    pub fn new(repeats: usize) -> RepeatVectorLayer {
        RepeatVectorLayer { repeats, cache_len: None }
    }

    pub fn repeats(&self) -> usize {
        self.repeats
    }

    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        if input.len() != 1 {
            return Err(Error::Shape(format!("repeat-vector expects 1-D input, got {input:?}")));
        }
        Ok(vec![self.repeats, input[0]])
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let shape = self.output_shape(x.shape())?;
        let mut data = Vec::with_capacity(self.repeats * x.len());
        for _ in 0..self.repeats {
            data.extend_from_slice(x.data());
        }
        Tensor::from_vec(&shape, data)
    }

    pub fn forward_train(&mut self, x: &Tensor) -> Result<Tensor> {
        self.cache_len = Some(x.len());
        self.forward(x)
    }

    pub fn backward(&mut self, dy: &Tensor) -> Result<Tensor> {
        let len = self
            .cache_len
            .ok_or_else(|| Error::Config("repeat-vector backward called before forward".into()))?;
        if dy.shape() != [self.repeats, len] {
            return Err(Error::Shape(format!(
                "repeat-vector backward expects gradient [{}, {len}], got {:?}",
                self.repeats,
                dy.shape()
            )));
        }
        dy.sum_axis(0)
    }

    pub(crate) fn clear_cache(&mut self) {
        self.cache_len = None;
    }
}

/// One dense layer applied independently to every timestep, weights shared.
#[derive(Debug, Clone)]
pub struct TimeDistributedDenseLayer {
    pub(crate) w: Tensor, // out x in
    pub(crate) b: Tensor, // out
    pub(crate) activation: Activation,
    pub(crate) dw: Tensor,
    pub(crate) db: Tensor,
    cache: Option<TdCache>,
}

#[derive(Debug, Clone)]
struct TdCache {
    input: Tensor,
    pre: Tensor,
}

impl TimeDistributedDenseLayer {
    pub fn new(
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        rng: &mut RandomSource,
    ) -> Result<TimeDistributedDenseLayer> {
        let limit = glorot_limit(in_dim, out_dim);
        let w = rng.uniform(&[out_dim, in_dim], -limit, limit)?;
        let b = Tensor::zeros(&[out_dim])?;
        TimeDistributedDenseLayer::from_parts(w, b, activation)
    }

    pub fn from_parts(
        w: Tensor,
        b: Tensor,
        activation: Activation,
    ) -> Result<TimeDistributedDenseLayer> {
        if w.rank() != 2 || b.rank() != 1 || b.len() != w.rows() {
            return Err(Error::Shape(format!(
                "time-distributed dense parts disagree: weights {:?}, bias {:?}",
                w.shape(),
                b.shape()
            )));
        }
        let dw = Tensor::zeros(w.shape())?;
        let db = Tensor::zeros(b.shape())?;
        Ok(TimeDistributedDenseLayer { w, b, activation, dw, db, cache: None })
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

    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        if input.len() != 2 || input[1] != self.in_dim() {
            return Err(Error::Shape(format!(
                "time-distributed dense expects input [steps, {}], got {input:?}",
                self.in_dim()
            )));
        }
        Ok(vec![input[0], self.out_dim()])
    }

    fn pre_activation(&self, x: &Tensor) -> Result<Tensor> {
        let out_shape = self.output_shape(x.shape())?;
        let (steps, out_dim, in_dim) = (out_shape[0], self.out_dim(), self.in_dim());
        let mut pre = vec![0.0; steps * out_dim];
        for t in 0..steps {
            let xrow = x.row(t);
            for o in 0..out_dim {
                let wrow = &self.w.data()[o * in_dim..(o + 1) * in_dim];
                let mut acc = self.b.data()[o];
                for (w, xv) in wrow.iter().zip(xrow) {
                    acc += w * xv;
                }
                pre[t * out_dim + o] = acc;
            }
        }
        Tensor::from_vec(&out_shape, pre)
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        Ok(self.activation.map(&self.pre_activation(x)?))
    }

    pub fn forward_train(&mut self, x: &Tensor) -> Result<Tensor> {
        let pre = self.pre_activation(x)?;
        let out = self.activation.map(&pre);
        self.cache = Some(TdCache { input: x.clone(), pre });
        Ok(out)
    }

    pub fn backward(&mut self, dy: &Tensor) -> Result<Tensor> {
        let cache = self.cache.as_ref().ok_or_else(|| {
            Error::Config("time-distributed dense backward called before forward".into())
        })?;
        let steps = cache.input.shape()[0];
        let (out_dim, in_dim) = (self.out_dim(), self.in_dim());
        if dy.shape() != [steps, out_dim] {
            return Err(Error::Shape(format!(
                "time-distributed dense backward expects gradient [{steps}, {out_dim}], got {:?}",
                dy.shape()
            )));
        }
        let mut dx = vec![0.0; steps * in_dim];
        for t in 0..steps {
            let xrow = cache.input.row(t);
            let dxrow = &mut dx[t * in_dim..(t + 1) * in_dim];
            for o in 0..out_dim {
                let dpre = dy.get2(t, o) * self.activation.prime(cache.pre.get2(t, o));
                if dpre == 0.0 {
                    continue;
                }
                self.db.data_mut()[o] += dpre;
                let wrow = &self.w.data()[o * in_dim..(o + 1) * in_dim];
                let grow = &mut self.dw.data_mut()[o * in_dim..(o + 1) * in_dim];
                for i in 0..in_dim {
                    grow[i] += dpre * xrow[i];
                    dxrow[i] += dpre * wrow[i];
                }
            }
        }
        Tensor::from_vec(&[steps, in_dim], dx)
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
    fn flatten_round_trip() {
        let mut layer = FlattenLayer::new();
        let x = Tensor::from_vec(&[2, 3], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let y = layer.forward_train(&x).unwrap();
        assert_eq!(y.shape(), &[6]);
        let dx = layer.backward(&y).unwrap();
        assert_eq!(dx.shape(), &[2, 3]);
        assert_eq!(dx.data(), x.data());
    }

    #[test]
    fn repeat_vector_tiles_and_sums() {
        let mut layer = RepeatVectorLayer::new(3);
        let x = Tensor::from_vec(&[2], vec![4.0, 5.0]).unwrap();
        let y = layer.forward_train(&x).unwrap();
        assert_eq!(y.shape(), &[3, 2]);
        for t in 0..3 {
            assert_eq!(y.row(t), &[4.0, 5.0]);
        }
        let dy = Tensor::from_vec(&[3, 2], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let dx = layer.backward(&dy).unwrap();
        assert_eq!(dx.data(), &[9.0, 12.0]);
    }

    #[test]
    fn time_distributed_shares_weights() {
        let w = Tensor::from_vec(&[1, 2], vec![2.0, -1.0]).unwrap();
        let b = Tensor::from_vec(&[1], vec![0.5]).unwrap();
        let layer = TimeDistributedDenseLayer::from_parts(w, b, Activation::Identity).unwrap();
        let x = Tensor::from_vec(&[3, 2], vec![1.0, 0.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
        let y = layer.forward(&x).unwrap();
        assert_eq!(y.data(), &[2.5, -0.5, 1.5]);
    }
}
