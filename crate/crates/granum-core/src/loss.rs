//! Mean squared error and its gradient.

use alloc::format;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Returns (loss, d loss / d pred) with loss = (1/n) * sum((pred - target)^2).
pub fn mse_loss(pred: &Tensor, target: &Tensor) -> Result<(f64, Tensor)> {
    if pred.shape() != target.shape() {
        return Err(Error::Shape(format!(
            "mse on mismatched shapes {:?} and {:?}",
            pred.shape(),
            target.shape()
        )));
    }
    let n = pred.len() as f64;
    let mut loss = 0.0;
    let grad = pred.zip_with(target, |p, t| {
        let d = p - t;
        loss += d * d;
        2.0 * d / n
    })?;
    Ok((loss / n, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn perfect_prediction() {
        let p = Tensor::from_vec(&[3], vec![1.0, 2.0, 3.0]).unwrap();
        let (loss, grad) = mse_loss(&p, &p).unwrap();
        assert_eq!(loss, 0.0);
        assert!(grad.data().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn hand_case() {
        let p = Tensor::from_vec(&[2], vec![1.0, 2.0]).unwrap();
        let t = Tensor::from_vec(&[2], vec![0.0, 0.0]).unwrap();
        let (loss, grad) = mse_loss(&p, &t).unwrap();
        assert_eq!(loss, 2.5);
        assert_eq!(grad.data(), &[1.0, 2.0]);
    }

    #[test]
    fn swap_symmetry() {
        let p = Tensor::from_vec(&[2], vec![3.0, -1.0]).unwrap();
        let t = Tensor::from_vec(&[2], vec![1.5, 0.5]).unwrap();
        let (l1, g1) = mse_loss(&p, &t).unwrap();
        let (l2, g2) = mse_loss(&t, &p).unwrap();
        assert_eq!(l1, l2);
        let flipped = g2.map(|v| -v);
        assert_eq!(g1, flipped);
    }

    #[test]
    fn shape_mismatch() {
        let p = Tensor::zeros(&[2]).unwrap();
        let t = Tensor::zeros(&[3]).unwrap();
        assert!(matches!(mse_loss(&p, &t), Err(Error::Shape(_))));
    }
}
