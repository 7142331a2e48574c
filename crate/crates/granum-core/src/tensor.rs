//! Dense row-major f64 tensors.
//!
//! Only the handful of shapes and operations the forecast layers need:
//! 1-D vectors, 2-D matrices, and the 3-D filter banks of the convolution
//! layer. No broadcasting, no views — every operation allocates its output.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A shape-tagged, row-major f64 array. `data.len() == product(shape)` holds
/// at all times.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

fn check_shape(shape: &[usize]) -> Result<usize> {
    if shape.is_empty() {
        return Err(Error::Shape("tensor shape must have at least one dimension".into()));
    }
    let mut n = 1usize;
    for &d in shape {
        if d == 0 {
            return Err(Error::Shape(format!("zero dimension in shape {shape:?}")));
        }
        n = n.checked_mul(d).ok_or_else(|| Error::Shape(format!("shape {shape:?} overflows")))?;
    }
    Ok(n)
}

impl Tensor {
    /// All-zero tensor of the given shape.
    pub fn zeros(shape: &[usize]) -> Result<Tensor> {
        let n = check_shape(shape)?;
        Ok(Tensor { shape: shape.to_vec(), data: vec![0.0; n] })
    }

    /// Tensor wrapping `data` in row-major order.
    pub fn from_vec(shape: &[usize], data: Vec<f64>) -> Result<Tensor> {
        let n = check_shape(shape)?;
        if data.len() != n {
            return Err(Error::Shape(format!(
                "shape {shape:?} needs {n} values, got {}",
                data.len()
            )));
        }
        Ok(Tensor { shape: shape.to_vec(), data })
    }

    /// n-by-n identity matrix.
    pub fn eye(n: usize) -> Result<Tensor> {
        let mut t = Tensor::zeros(&[n, n])?;
        for i in 0..n {
            t.data[i * n + i] = 1.0;
        }
        Ok(t)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Total number of elements.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    /// Rows of a 2-D tensor (or length of a 1-D tensor).
    pub fn rows(&self) -> usize {
        self.shape[0]
    }

    /// Columns of a 2-D tensor.
    pub fn cols(&self) -> usize {
        debug_assert!(self.rank() == 2);
        self.shape[1]
    }

    #[inline]
    pub fn get2(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.shape[1] + c]
    }

    #[inline]
    pub fn set2(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.shape[1] + c] = v;
    }

    /// Contiguous row `r` of a 2-D tensor.
    pub fn row(&self, r: usize) -> &[f64] {
        let w = self.shape[1];
        &self.data[r * w..(r + 1) * w]
    }

    /// Reinterprets the data under a new shape with the same element count.
    pub fn reshaped(&self, shape: &[usize]) -> Result<Tensor> {
        let n = check_shape(shape)?;
        if n != self.data.len() {
            return Err(Error::Shape(format!(
                "cannot reshape {:?} ({} elems) into {shape:?} ({n} elems)",
                self.shape,
                self.data.len()
            )));
        }
        Ok(Tensor { shape: shape.to_vec(), data: self.data.clone() })
    }

    /// Standard matrix product of a (m x k) and a (k x n) tensor.
    pub fn matmul(&self, other: &Tensor) -> Result<Tensor> {
        if self.rank() != 2 || other.rank() != 2 {
            return Err(Error::Shape(format!(
                "matmul needs 2-D operands, got {:?} and {:?}",
                self.shape, other.shape
            )));
        }
        let (m, k) = (self.shape[0], self.shape[1]);
        let (k2, n) = (other.shape[0], other.shape[1]);
        if k != k2 {
            return Err(Error::Shape(format!(
                "matmul inner dimensions disagree: {m}x{k} * {k2}x{n}"
            )));
        }
        let mut out = vec![0.0; m * n];
        // i-k-j order keeps the inner loop contiguous in both `other` and `out`.
        for i in 0..m {
            for kk in 0..k {
                let a = self.data[i * k + kk];
                if a == 0.0 {
                    continue;
                }
                let brow = &other.data[kk * n..(kk + 1) * n];
                let orow = &mut out[i * n..(i + 1) * n];
                for j in 0..n {
                    orow[j] += a * brow[j];
                }
            }
        }
        Ok(Tensor { shape: vec![m, n], data: out })
    }

    /// Elementwise map; shape preserved.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Tensor {
        Tensor { shape: self.shape.clone(), data: self.data.iter().map(|&x| f(x)).collect() }
    }

    /// Elementwise combination of two same-shaped tensors.
    pub fn zip_with(&self, other: &Tensor, mut f: impl FnMut(f64, f64) -> f64) -> Result<Tensor> {
        if self.shape != other.shape {
            return Err(Error::Shape(format!(
                "elementwise op on mismatched shapes {:?} and {:?}",
                self.shape, other.shape
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(&x, &y)| f(x, y)).collect();
        Ok(Tensor { shape: self.shape.clone(), data })
    }

    pub fn scale_in_place(&mut self, factor: f64) {
        for v in &mut self.data {
            *v *= factor;
        }
    }

    pub fn fill(&mut self, value: f64) {
        for v in &mut self.data {
            *v = value;
        }
    }

    /// Sum of all elements.
    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Mean of all elements.
    pub fn mean(&self) -> f64 {
        self.sum() / self.data.len() as f64
    }

    /// Maximum element and its flat index; the lowest index wins ties.
    pub fn max_with_index(&self) -> (f64, usize) {
        let mut best = self.data[0];
        let mut idx = 0;
        for (i, &v) in self.data.iter().enumerate().skip(1) {
            if v > best {
                best = v;
                idx = i;
            }
        }
        (best, idx)
    }

    /// Sum along one axis of a 2-D tensor. Axis 0 collapses rows.
    pub fn sum_axis(&self, axis: usize) -> Result<Tensor> {
        if self.rank() != 2 {
            return Err(Error::Shape(format!("axis reduction needs 2-D, got {:?}", self.shape)));
        }
        let (r, c) = (self.shape[0], self.shape[1]);
        match axis {
            0 => {
                let mut out = vec![0.0; c];
                for i in 0..r {
                    for j in 0..c {
                        out[j] += self.data[i * c + j];
                    }
                }
                Tensor::from_vec(&[c], out)
            }
            1 => {
                let mut out = vec![0.0; r];
                for i in 0..r {
                    out[i] = self.row(i).iter().sum();
                }
                Tensor::from_vec(&[r], out)
            }
            _ => Err(Error::Shape(format!("axis {axis} out of range for 2-D tensor"))),
        }
    }

    /// Mean along one axis of a 2-D tensor.
    pub fn mean_axis(&self, axis: usize) -> Result<Tensor> {
        let mut s = self.sum_axis(axis)?;
        let denom = self.shape[axis] as f64;
        s.scale_in_place(1.0 / denom);
        Ok(s)
    }

    /// True when every element is finite.
    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Bit-exact equality, distinguishing -0.0 and NaN payloads.
    pub fn bits_eq(&self, other: &Tensor) -> bool {
        self.shape == other.shape
            && self.data.iter().zip(&other.data).all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomSource;

    #[test]
    fn zeros_shapes() {
        let t = Tensor::zeros(&[2, 2]).unwrap();
        assert_eq!(t.data(), &[0.0; 4]);
        let t = Tensor::zeros(&[5, 1]).unwrap();
        assert_eq!(t.len(), 5);
        let t = Tensor::zeros(&[1]).unwrap();
        assert_eq!(t.data(), &[0.0]);
    }

    #[test]
    fn zeros_rejects_bad_shapes() {
        assert!(matches!(Tensor::zeros(&[]), Err(Error::Shape(_))));
        assert!(matches!(Tensor::zeros(&[3, 0]), Err(Error::Shape(_))));
    }

    #[test]
    fn matmul_identity_is_bitwise() {
        let x = Tensor::from_vec(&[2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let i = Tensor::eye(2).unwrap();
        let y = i.matmul(&x).unwrap();
        assert!(y.bits_eq(&x));
    }

    #[test]
    fn matmul_hand_case() {
        let a = Tensor::from_vec(&[2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = Tensor::from_vec(&[2, 1], vec![5.0, 6.0]).unwrap();
        let c = a.matmul(&b).unwrap();
        assert_eq!(c.shape(), &[2, 1]);
        assert_eq!(c.data(), &[17.0, 39.0]);
    }

    #[test]
    fn matmul_mismatch() {
        let a = Tensor::zeros(&[2, 3]).unwrap();
        let b = Tensor::zeros(&[4, 2]).unwrap();
        assert!(matches!(a.matmul(&b), Err(Error::Shape(_))));
    }

    #[test]
    fn elementwise_ops() {
        let a = Tensor::from_vec(&[2], vec![1.0, -1.0]).unwrap();
        assert_eq!(a.map(|x| -x).data(), &[-1.0, 1.0]);

        let b = Tensor::from_vec(&[2], vec![3.0, 4.0]).unwrap();
        let c = Tensor::from_vec(&[2], vec![1.0, 2.0]).unwrap();
        assert_eq!(c.zip_with(&b, |x, y| x + y).unwrap().data(), &[4.0, 6.0]);

        let d = Tensor::from_vec(&[1], vec![1.0]).unwrap();
        assert!(matches!(d.zip_with(&b, |x, y| x + y), Err(Error::Shape(_))));
    }

    #[test]
    fn reductions() {
        let t = Tensor::from_vec(&[3], vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(t.sum(), 6.0);
        let t = Tensor::from_vec(&[2], vec![2.0, 4.0]).unwrap();
        assert_eq!(t.mean(), 3.0);
        let t = Tensor::from_vec(&[3], vec![1.0, 3.0, 3.0]).unwrap();
        assert_eq!(t.max_with_index(), (3.0, 1));
    }

    #[test]
    fn axis_reductions() {
        let t = Tensor::from_vec(&[2, 3], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(t.sum_axis(0).unwrap().data(), &[5.0, 7.0, 9.0]);
        assert_eq!(t.sum_axis(1).unwrap().data(), &[6.0, 15.0]);
        assert_eq!(t.mean_axis(0).unwrap().data(), &[2.5, 3.5, 4.5]);
        assert!(matches!(t.sum_axis(2), Err(Error::Shape(_))));
    }

    #[test]
    fn shape_preserved_by_elementwise_ops() {
        let mut rng = RandomSource::new(7);
        for _ in 0..20 {
            let r = 1 + (rng.next_below(4) as usize);
            let c = 1 + (rng.next_below(4) as usize);
            let t = rng.uniform(&[r, c], -1.0, 1.0).unwrap();
            assert_eq!(t.map(|x| x * 2.0).shape(), t.shape());
            let u = rng.uniform(&[r, c], -1.0, 1.0).unwrap();
            assert_eq!(t.zip_with(&u, |a, b| a - b).unwrap().shape(), t.shape());
        }
    }
}
