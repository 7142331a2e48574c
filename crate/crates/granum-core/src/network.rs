//! An ordered stack of layers with shape-checked wiring.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::layer::Layer;
use crate::tensor::Tensor;

/// A feed-forward stack. Built once, the layer chain is validated by
/// propagating the input shape through every layer.
///
/// A network under training is single-owner (forward caches are mutable
/// state); `infer` is read-only and safe to share across threads.
#[derive(Debug, Clone)]
pub struct Network {
    layers: Vec<Layer>,
    input_shape: Vec<usize>,
    output_shape: Vec<usize>,
}

impl Network {
    pub fn new(layers: Vec<Layer>, input_shape: Vec<usize>) -> Result<Network> {
        if layers.is_empty() {
            return Err(Error::Config("network needs at least one layer".into()));
        }
        let mut shape = input_shape.clone();
        for (idx, layer) in layers.iter().enumerate() {
            shape = layer.output_shape(&shape).map_err(|e| {
                Error::Config(format!("layer {idx} ({}) rejects its input: {e}", layer.kind()))
            })?;
        }
        Ok(Network { layers, input_shape, output_shape: shape })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.input_shape
    }

    pub fn output_shape(&self) -> &[usize] {
        &self.output_shape
    }

    fn check_input(&self, x: &Tensor) -> Result<()> {
        if x.shape() != self.input_shape {
            return Err(Error::Shape(format!(
                "network expects input {:?}, got {:?}",
                self.input_shape,
                x.shape()
            )));
        }
        Ok(())
    }

    /// Pure inference; no caches are written, `self` stays untouched.
    pub fn infer(&self, x: &Tensor) -> Result<Tensor> {
        self.check_input(x)?;
        let mut cur = x.clone();
        for layer in &self.layers {
            cur = layer.forward(&cur)?;
        }
        Ok(cur)
    }

    /// Forward pass caching everything `backward` needs.
    pub fn forward_train(&mut self, x: &Tensor) -> Result<Tensor> {
        self.check_input(x)?;
        let mut cur = x.clone();
        for layer in &mut self.layers {
            cur = layer.forward_train(&cur)?;
        }
        Ok(cur)
    }

    /// Backpropagates an output gradient, accumulating parameter gradients.
    pub fn backward(&mut self, dy: &Tensor) -> Result<Tensor> {
        let mut cur = dy.clone();
        for layer in self.layers.iter_mut().rev() {
            cur = layer.backward(&cur)?;
        }
        Ok(cur)
    }

    pub fn zero_grads(&mut self) {
        for layer in &mut self.layers {
            layer.zero_grads();
        }
    }

    pub fn clear_caches(&mut self) {
        for layer in &mut self.layers {
            layer.clear_cache();
        }
    }

    pub fn scale_grads(&mut self, factor: f64) {
        for layer in &mut self.layers {
            for g in layer.grads_mut() {
                g.scale_in_place(factor);
            }
        }
    }

    pub fn params(&self) -> Vec<&Tensor> {
        self.layers.iter().flat_map(|l| l.params()).collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        self.layers.iter_mut().flat_map(|l| l.params_mut()).collect()
    }

    pub fn grads(&self) -> Vec<&Tensor> {
        self.layers.iter().flat_map(|l| l.grads()).collect()
    }

    pub fn visit_params_grads(&mut self, f: &mut dyn FnMut(&mut Tensor, &Tensor)) {
        for layer in &mut self.layers {
            layer.visit_params_grads(f);
        }
    }

    /// Total number of scalar parameters.
    pub fn param_count(&self) -> usize {
        self.params().iter().map(|t| t.len()).sum()
    }
}
