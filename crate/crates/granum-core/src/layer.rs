//! Closed set of layer kinds and uniform dispatch over them.

use alloc::vec::Vec;

use crate::conv::Conv1DLayer;
use crate::dense::DenseLayer;
use crate::error::Result;
use crate::lstm::LstmLayer;
use crate::pool::MaxPool1DLayer;
use crate::reshape::{FlattenLayer, RepeatVectorLayer, TimeDistributedDenseLayer};
use crate::tensor::Tensor;

#[derive(Debug, Clone)]
pub enum Layer {
    Dense(DenseLayer),
    Conv1D(Conv1DLayer),
    MaxPool1D(MaxPool1DLayer),
    Flatten(FlattenLayer),
    Lstm(LstmLayer),
    RepeatVector(RepeatVectorLayer),
    TimeDistributedDense(TimeDistributedDenseLayer),
}

impl Layer {
    pub fn kind(&self) -> &'static str {
        match self {
            Layer::Dense(_) => "dense",
            Layer::Conv1D(_) => "conv1d",
            Layer::MaxPool1D(_) => "maxpool1d",
            Layer::Flatten(_) => "flatten",
            Layer::Lstm(_) => "lstm",
            Layer::RepeatVector(_) => "repeat_vector",
            Layer::TimeDistributedDense(_) => "time_distributed_dense",
        }
    }

    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        match self {
            Layer::Dense(l) => l.output_shape(input),
            Layer::Conv1D(l) => l.output_shape(input),
            Layer::MaxPool1D(l) => l.output_shape(input),
            Layer::Flatten(l) => l.output_shape(input),
            Layer::Lstm(l) => l.output_shape(input),
            Layer::RepeatVector(l) => l.output_shape(input),
            Layer::TimeDistributedDense(l) => l.output_shape(input),
        }
    }

    /// Pure forward pass; leaves no state behind.
    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        match self {
            Layer::Dense(l) => l.forward(x),
            Layer::Conv1D(l) => l.forward(x),
            Layer::MaxPool1D(l) => l.forward(x),
            Layer::Flatten(l) => l.forward(x),
            Layer::Lstm(l) => l.forward(x),
            Layer::RepeatVector(l) => l.forward(x),
            Layer::TimeDistributedDense(l) => l.forward(x),
        }
    }

    /// Forward pass that caches what backward needs.
    pub fn forward_train(&mut self, x: &Tensor) -> Result<Tensor> {
        match self {
            Layer::Dense(l) => l.forward_train(x),
            Layer::Conv1D(l) => l.forward_train(x),
            Layer::MaxPool1D(l) => l.forward_train(x),
            Layer::Flatten(l) => l.forward_train(x),
            Layer::Lstm(l) => l.forward_train(x),
            Layer::RepeatVector(l) => l.forward_train(x),
            Layer::TimeDistributedDense(l) => l.forward_train(x),
        }
    }

    /// Consumes the forward cache, accumulates parameter gradients, and
    /// returns the gradient w.r.t. this layer's input.
    pub fn backward(&mut self, dy: &Tensor) -> Result<Tensor> {
        match self {
            Layer::Dense(l) => l.backward(dy),
            Layer::Conv1D(l) => l.backward(dy),
            Layer::MaxPool1D(l) => l.backward(dy),
            Layer::Flatten(l) => l.backward(dy),
            Layer::Lstm(l) => l.backward(dy),
            Layer::RepeatVector(l) => l.backward(dy),
            Layer::TimeDistributedDense(l) => l.backward(dy),
        }
    }

    pub fn zero_grads(&mut self) {
        match self {
            Layer::Dense(l) => l.zero_grads(),
            Layer::Conv1D(l) => l.zero_grads(),
            Layer::MaxPool1D(l) => l.zero_grads(),
            Layer::Flatten(_) | Layer::RepeatVector(_) => {}
            Layer::Lstm(l) => l.zero_grads(),
            Layer::TimeDistributedDense(l) => l.zero_grads(),
        }
    }

    pub fn clear_cache(&mut self) {
        match self {
            Layer::Dense(l) => l.clear_cache(),
            Layer::Conv1D(l) => l.clear_cache(),
            Layer::MaxPool1D(l) => l.clear_cache(),
            Layer::Flatten(l) => l.clear_cache(),
            Layer::Lstm(l) => l.clear_cache(),
            Layer::RepeatVector(l) => l.clear_cache(),
            Layer::TimeDistributedDense(l) => l.clear_cache(),
        }
    }

    /// Parameter tensors in a fixed, documented order (weights before
    /// biases; LSTM gates ordered f, i, o, c with input weights, then
    /// recurrent weights, then biases).
    pub fn params(&self) -> Vec<&Tensor> {
        match self {
            Layer::Dense(l) => alloc::vec![&l.w, &l.b],
            Layer::Conv1D(l) => alloc::vec![&l.filters, &l.biases],
            Layer::MaxPool1D(_) | Layer::Flatten(_) | Layer::RepeatVector(_) => Vec::new(),
            Layer::Lstm(l) => {
                let mut v = Vec::with_capacity(12);
                v.extend(l.wx.iter());
                v.extend(l.wh.iter());
                v.extend(l.b.iter());
                v
            }
            Layer::TimeDistributedDense(l) => alloc::vec![&l.w, &l.b],
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        match self {
            Layer::Dense(l) => alloc::vec![&mut l.w, &mut l.b],
            Layer::Conv1D(l) => alloc::vec![&mut l.filters, &mut l.biases],
            Layer::MaxPool1D(_) | Layer::Flatten(_) | Layer::RepeatVector(_) => Vec::new(),
            Layer::Lstm(l) => {
                let mut v: Vec<&mut Tensor> = Vec::with_capacity(12);
                v.extend(l.wx.iter_mut());
                v.extend(l.wh.iter_mut());
                v.extend(l.b.iter_mut());
                v
            }
            Layer::TimeDistributedDense(l) => alloc::vec![&mut l.w, &mut l.b],
        }
    }

    /// Gradient tensors, pairwise shape-identical with `params`.
    pub fn grads(&self) -> Vec<&Tensor> {
        match self {
            Layer::Dense(l) => alloc::vec![&l.dw, &l.db],
            Layer::Conv1D(l) => alloc::vec![&l.dfilters, &l.dbiases],
            Layer::MaxPool1D(_) | Layer::Flatten(_) | Layer::RepeatVector(_) => Vec::new(),
            Layer::Lstm(l) => {
                let mut v = Vec::with_capacity(12);
                v.extend(l.gwx.iter());
                v.extend(l.gwh.iter());
                v.extend(l.gb.iter());
                v
            }
            Layer::TimeDistributedDense(l) => alloc::vec![&l.dw, &l.db],
        }
    }

    pub fn grads_mut(&mut self) -> Vec<&mut Tensor> {
        match self {
            Layer::Dense(l) => alloc::vec![&mut l.dw, &mut l.db],
            Layer::Conv1D(l) => alloc::vec![&mut l.dfilters, &mut l.dbiases],
            Layer::MaxPool1D(_) | Layer::Flatten(_) | Layer::RepeatVector(_) => Vec::new(),
            Layer::Lstm(l) => {
                let mut v: Vec<&mut Tensor> = Vec::with_capacity(12);
                v.extend(l.gwx.iter_mut());
                v.extend(l.gwh.iter_mut());
                v.extend(l.gb.iter_mut());
                v
            }
            Layer::TimeDistributedDense(l) => alloc::vec![&mut l.dw, &mut l.db],
        }
    }

    /// Visits (parameter, gradient) pairs without aliasing issues; the
    /// optimizer walks the whole network through this.
    pub fn visit_params_grads(&mut self, f: &mut dyn FnMut(&mut Tensor, &Tensor)) {
        match self {
            Layer::Dense(l) => {
                f(&mut l.w, &l.dw);
                f(&mut l.b, &l.db);
            }
            Layer::Conv1D(l) => {
                f(&mut l.filters, &l.dfilters);
                f(&mut l.biases, &l.dbiases);
            }
            Layer::MaxPool1D(_) | Layer::Flatten(_) | Layer::RepeatVector(_) => {}
            Layer::Lstm(l) => {
                for gate in 0..4 {
                    f(&mut l.wx[gate], &l.gwx[gate]);
                }
                for gate in 0..4 {
                    f(&mut l.wh[gate], &l.gwh[gate]);
                }
                for gate in 0..4 {
                    f(&mut l.b[gate], &l.gb[gate]);
                }
            }
            Layer::TimeDistributedDense(l) => {
                f(&mut l.w, &l.dw);
                f(&mut l.b, &l.db);
            }
        }
    }
}
