//! 1-D convolution (cross-correlation, valid padding, stride 1).
//!
//! Input is (length x channels); output is (length - kernel + 1) x filters.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::activations::Activation;
use crate::dense::glorot_limit;
use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::tensor::Tensor;

#[derive(Debug, Clone)]
pub struct Conv1DLayer {
    /// Filter bank, shape [n_filters, kernel, in_channels].
    pub(crate) filters: Tensor,
    pub(crate) biases: Tensor,
    pub(crate) activation: Activation,
    pub(crate) dfilters: Tensor,
    pub(crate) dbiases: Tensor,
    cache: Option<ConvCache>,
}

#[derive(Debug, Clone)]
struct ConvCache {
    input: Tensor,
    pre: Tensor,
}

impl Conv1DLayer {
    pub fn new(
        n_filters: usize,
        kernel: usize,
        in_channels: usize,
        activation: Activation,
        rng: &mut RandomSource,
    ) -> Result<Conv1DLayer> {
        if n_filters == 0 || kernel == 0 || in_channels == 0 {
            return Err(Error::Config("conv1d dimensions must be positive".into()));
        }
        let limit = glorot_limit(kernel * in_channels, kernel * n_filters);
        let filters = rng.uniform(&[n_filters, kernel, in_channels], -limit, limit)?;
        let biases = Tensor::zeros(&[n_filters])?;
        Conv1DLayer::from_parts(filters, biases, activation)
    }

    pub fn from_parts(
        filters: Tensor,
        biases: Tensor,
        activation: Activation,
    ) -> Result<Conv1DLayer> {
        if filters.rank() != 3 || biases.rank() != 1 || biases.len() != filters.shape()[0] {
            return Err(Error::Shape(format!(
                "conv1d parts disagree: filters {:?}, biases {:?}",
                filters.shape(),
                biases.shape()
            )));
        }
        let dfilters = Tensor::zeros(filters.shape())?;
        let dbiases = Tensor::zeros(biases.shape())?;
        Ok(Conv1DLayer { filters, biases, activation, dfilters, dbiases, cache: None })
    }

    pub fn n_filters(&self) -> usize {
        self.filters.shape()[0]
    }

    pub fn kernel(&self) -> usize {
        self.filters.shape()[1]
    }

    pub fn in_channels(&self) -> usize {
        self.filters.shape()[2]
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn filters(&self) -> &Tensor {
        &self.filters
    }

    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        if input.len() != 2 || input[1] != self.in_channels() {
            return Err(Error::Shape(format!(
                "conv1d expects input [len, {}], got {input:?}",
                self.in_channels()
            )));
        }
        if input[0] < self.kernel() {
            return Err(Error::Shape(format!(
                "conv1d input length {} shorter than kernel {}",
                input[0],
                self.kernel()
            )));
        }
        Ok(vec![input[0] - self.kernel() + 1, self.n_filters()])
    }

    fn pre_activation(&self, x: &Tensor) -> Result<Tensor> {
        let out_shape = self.output_shape(x.shape())?;
        let (out_len, n_f) = (out_shape[0], out_shape[1]);
        let (k, c) = (self.kernel(), self.in_channels());
        let mut pre = vec![0.0; out_len * n_f];
        for i in 0..out_len {
            for f in 0..n_f {
                let mut acc = self.biases.data()[f];
                let fbase = f * k * c;
                for kk in 0..k {
                    let xrow = x.row(i + kk);
                    let frow = &self.filters.data()[fbase + kk * c..fbase + (kk + 1) * c];
                    for ch in 0..c {
                        acc += xrow[ch] * frow[ch];
                    }
                }
                pre[i * n_f + f] = acc;
            }
        }
        Tensor::from_vec(&[out_len, n_f], pre)
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        Ok(self.activation.map(&self.pre_activation(x)?))
    }

    pub fn forward_train(&mut self, x: &Tensor) -> Result<Tensor> {
        let pre = self.pre_activation(x)?;
        let out = self.activation.map(&pre);
        self.cache = Some(ConvCache { input: x.clone(), pre });
        Ok(out)
    }

    pub fn backward(&mut self, dy: &Tensor) -> Result<Tensor> {
        let cache = self
            .cache
            .as_ref()
            .ok_or_else(|| Error::Config("conv1d backward called before forward".into()))?;
        let (k, c, n_f) = (self.kernel(), self.in_channels(), self.n_filters());
        let in_len = cache.input.shape()[0];
        let out_len = in_len - k + 1;
        if dy.shape() != [out_len, n_f] {
            return Err(Error::Shape(format!(
                "conv1d backward expects gradient [{out_len}, {n_f}], got {:?}",
                dy.shape()
            )));
        }
        let mut dx = vec![0.0; in_len * c];
        for i in 0..out_len {
            for f in 0..n_f {
                let dpre = dy.get2(i, f) * self.activation.prime(cache.pre.get2(i, f));
                if dpre == 0.0 {
                    continue;
                }
                self.dbiases.data_mut()[f] += dpre;
                let fbase = f * k * c;
                for kk in 0..k {
                    let xrow = cache.input.row(i + kk);
                    for ch in 0..c {
                        self.dfilters.data_mut()[fbase + kk * c + ch] += dpre * xrow[ch];
                        dx[(i + kk) * c + ch] += dpre * self.filters.data()[fbase + kk * c + ch];
                    }
                }
            }
        }
        Tensor::from_vec(&[in_len, c], dx)
    }

    pub fn zero_grads(&mut self) {
        self.dfilters.fill(0.0);
        self.dbiases.fill(0.0);
    }

    pub(crate) fn clear_cache(&mut self) {
        self.cache = None;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge_filter() -> Conv1DLayer {
        let filters = Tensor::from_vec(&[1, 3, 1], vec![1.0, 0.0, -1.0]).unwrap();
        let biases = Tensor::zeros(&[1]).unwrap();
        Conv1DLayer::from_parts(filters, biases, Activation::Identity).unwrap()
    }

    #[test]
    fn hand_convolution() {
        let layer = edge_filter();
        let x = Tensor::from_vec(&[5, 1], vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let y = layer.forward(&x).unwrap();
        assert_eq!(y.shape(), &[3, 1]);
        assert_eq!(y.data(), &[-2.0, -2.0, -2.0]);
    }

    #[test]
    fn identity_kernel() {
        let filters = Tensor::from_vec(&[1, 1, 1], vec![1.0]).unwrap();
        let biases = Tensor::zeros(&[1]).unwrap();
        let layer = Conv1DLayer::from_parts(filters, biases, Activation::Identity).unwrap();
        let x = Tensor::from_vec(&[4, 1], vec![2.0, -3.0, 5.0, 7.0]).unwrap();
        assert_eq!(layer.forward(&x).unwrap().data(), x.data());
    }

    #[test]
    fn too_short_input() {
        let layer = edge_filter();
        let x = Tensor::from_vec(&[2, 1], vec![1.0, 2.0]).unwrap();
        assert!(matches!(layer.forward(&x), Err(Error::Shape(_))));
    }

    #[test]
    fn backward_routes_gradient() {
        let mut layer = edge_filter();
        let x = Tensor::from_vec(&[4, 1], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        layer.forward_train(&x).unwrap();
        let dy = Tensor::from_vec(&[2, 1], vec![1.0, 1.0]).unwrap();
        let dx = layer.backward(&dy).unwrap();
        // dx[i] = sum over windows containing i of the filter weight at that
        // offset: [f0, f1+f0, f2+f1, f2] = [1, 1, -1, -1]
        assert_eq!(dx.data(), &[1.0, 1.0, -1.0, -1.0]);
        // dfilters[k] = sum_i dy[i] * x[i+k]
        assert_eq!(layer.dfilters.data(), &[3.0, 5.0, 7.0]);
        assert_eq!(layer.dbiases.data(), &[2.0]);
    }
}
