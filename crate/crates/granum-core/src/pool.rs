//! 1-D max pooling with stride equal to the pool size.
//!
//! Output length is floor(input / pool); a trailing partial window is
//! dropped. Ties go to the lowest index so the backward routing is
//! reproducible.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Debug, Clone)]
pub struct MaxPool1DLayer {
    pub(crate) pool: usize,
    cache: Option<PoolCache>,
}

#[derive(Debug, Clone)]
struct PoolCache {
    in_len: usize,
    channels: usize,
    /// Winning input row per (output row, channel).
    argmax: Vec<usize>,
}

impl MaxPool1DLayer {
    pub fn new(pool: usize) -> MaxPool1DLayer {
        MaxPool1DLayer { pool, cache: None }
    }

    pub fn pool(&self) -> usize {
        self.pool
    }

    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        if input.len() != 2 {
            return Err(Error::Shape(format!("maxpool expects 2-D input, got {input:?}")));
        }
        if input[0] < self.pool {
            return Err(Error::Shape(format!(
                "maxpool input length {} shorter than pool size {}",
                input[0], self.pool
            )));
        }
        Ok(vec![input[0] / self.pool, input[1]])
    }

    fn compute(&self, x: &Tensor) -> Result<(Tensor, Vec<usize>)> {
        let out_shape = self.output_shape(x.shape())?;
        let (out_len, ch) = (out_shape[0], out_shape[1]);
        let mut out = vec![0.0; out_len * ch];
        let mut argmax = vec![0usize; out_len * ch];
        for j in 0..out_len {
            let start = j * self.pool;
            for c in 0..ch {
                let mut best = x.get2(start, c);
                let mut best_row = start;
                for r in start + 1..start + self.pool {
                    let v = x.get2(r, c);
                    if v > best {
                        best = v;
                        best_row = r;
                    }
                }
                out[j * ch + c] = best;
                argmax[j * ch + c] = best_row;
            }
        }
        Ok((Tensor::from_vec(&[out_len, ch], out)?, argmax))
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        Ok(self.compute(x)?.0)
    }

    pub fn forward_train(&mut self, x: &Tensor) -> Result<Tensor> {
        let (out, argmax) = self.compute(x)?;
        self.cache = Some(PoolCache { in_len: x.shape()[0], channels: x.shape()[1], argmax });
        Ok(out)
    }

    pub fn backward(&mut self, dy: &Tensor) -> Result<Tensor> {
        let cache = self
            .cache
            .as_ref()
            .ok_or_else(|| Error::Config("maxpool backward called before forward".into()))?;
        let out_len = cache.in_len / self.pool;
        if dy.shape() != [out_len, cache.channels] {
            return Err(Error::Shape(format!(
                "maxpool backward expects gradient [{out_len}, {}], got {:?}",
                cache.channels,
                dy.shape()
            )));
        }
        let mut dx = Tensor::zeros(&[cache.in_len, cache.channels])?;
        for j in 0..out_len {
            for c in 0..cache.channels {
                let row = cache.argmax[j * cache.channels + c];
                let cur = dx.get2(row, c);
                dx.set2(row, c, cur + dy.get2(j, c));
            }
        }
        Ok(dx)
    }

    pub fn zero_grads(&mut self) {}

    pub(crate) fn clear_cache(&mut self) {
        self.cache = None;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(values: &[f64]) -> Tensor {
        Tensor::from_vec(&[values.len(), 1], values.to_vec()).unwrap()
    }

    #[test]
    fn basic_pooling() {
        let layer = MaxPool1DLayer::new(2);
        let y = layer.forward(&col(&[1.0, 3.0, 2.0, 5.0])).unwrap();
        assert_eq!(y.data(), &[3.0, 5.0]);
    }

    #[test]
    fn tie_goes_to_first_index() {
        let mut layer = MaxPool1DLayer::new(2);
        let y = layer.forward_train(&col(&[4.0, 4.0])).unwrap();
        assert_eq!(y.data(), &[4.0]);
        let dx = layer.backward(&col(&[1.0])).unwrap();
        assert_eq!(dx.data(), &[1.0, 0.0]);
    }

    #[test]
    fn trailing_element_dropped() {
        let layer = MaxPool1DLayer::new(2);
        let y = layer.forward(&col(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(y.data(), &[2.0]);
    }

    #[test]
    fn too_short_input() {
        let layer = MaxPool1DLayer::new(2);
        assert!(matches!(layer.forward(&col(&[1.0])), Err(Error::Shape(_))));
    }

    #[test]
    fn backward_conserves_gradient_mass() {
        let mut layer = MaxPool1DLayer::new(3);
        let x = Tensor::from_vec(
            &[6, 2],
            vec![1.0, 9.0, 5.0, 2.0, 3.0, 4.0, 8.0, 1.0, 2.0, 7.0, 0.0, 3.0],
        )
        .unwrap();
        layer.forward_train(&x).unwrap();
        let dy = Tensor::from_vec(&[2, 2], vec![0.5, 1.5, 2.5, 3.5]).unwrap();
        let dx = layer.backward(&dy).unwrap();
        assert!((dx.sum() - dy.sum()).abs() < 1e-15);
    }
}
