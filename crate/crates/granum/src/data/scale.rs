//! Feature scaling fit on the training range only.
//!
//! Models are trained on z-scored inputs and targets; predictions are mapped
//! back to price units before any error is measured, so every reported RMSE
//! stays in raw prices. `ScaleMode::None` turns the whole thing into the
//! identity.

use granum_core::{Tensor, TrainSample};

use super::{DailyBar, FeatureSet, WindowSample};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleMode {
    None,
    ZScore,
}

impl ScaleMode {
    pub fn name(self) -> &'static str {
        match self {
            ScaleMode::None => "none",
            ScaleMode::ZScore => "zscore",
        }
    }

    pub fn from_name(name: &str) -> Option<ScaleMode> {
        match name {
            "none" => Some(ScaleMode::None),
            "zscore" => Some(ScaleMode::ZScore),
            _ => None,
        }
    }
}

/// Per-feature affine transform x -> (x - mean) / sd. The target transform
/// reuses the open column's statistics. A constant column gets sd = 1 so the
/// transform stays invertible.
#[derive(Debug, Clone)]
pub struct Scaler {
    mode: ScaleMode,
    features: FeatureSet,
    means: Vec<f64>,
    sds: Vec<f64>,
}

impl Scaler {
    /// Fits on the training bars only; applying the result to later data
    /// leaks nothing backward.
    pub fn fit(mode: ScaleMode, train_bars: &[DailyBar], features: FeatureSet) -> Result<Scaler> {
        if train_bars.is_empty() {
            return Err(Error::Data("cannot fit a scaler on an empty training range".into()));
        }
        let width = features.width();
        let mut means = vec![0.0; width];
        let mut sds = vec![1.0; width];
        if mode == ScaleMode::ZScore {
            let n = train_bars.len() as f64;
            for bar in train_bars {
                for (j, v) in features.extract(bar).into_iter().enumerate() {
                    means[j] += v;
                }
            }
            for m in &mut means {
                *m /= n;
            }
            let mut var = vec![0.0; width];
            for bar in train_bars {
                for (j, v) in features.extract(bar).into_iter().enumerate() {
                    let d = v - means[j];
                    var[j] += d * d;
                }
            }
            for (j, v) in var.into_iter().enumerate() {
                let sd = (v / n).sqrt();
                sds[j] = if sd > 1e-12 { sd } else { 1.0 };
            }
        }
        Ok(Scaler { mode, features, means, sds })
    }

    /// Identity scaler (used when scaling is off and a `Scaler` is needed).
    pub fn identity(features: FeatureSet) -> Scaler {
        let width = features.width();
        Scaler { mode: ScaleMode::None, features, means: vec![0.0; width], sds: vec![1.0; width] }
    }

    pub fn mode(&self) -> ScaleMode {
        self.mode
    }

    /// Scales a (days x width) input window column by column.
    pub fn transform_input(&self, window: &Tensor) -> Result<Tensor> {
        let width = self.features.width();
        if window.rank() != 2 || window.shape()[1] != width {
            return Err(Error::Core(granum_core::Error::Shape(format!(
                "scaler expects [days, {width}] windows, got {:?}",
                window.shape()
            ))));
        }
        if self.mode == ScaleMode::None {
            return Ok(window.clone());
        }
        let mut out = window.clone();
        let cols = width;
        for (i, v) in out.data_mut().iter_mut().enumerate() {
            let j = i % cols;
            *v = (*v - self.means[j]) / self.sds[j];
        }
        Ok(out)
    }

    /// Scales a vector of open prices with the open column's statistics.
    pub fn transform_target(&self, target: &Tensor) -> Tensor {
        if self.mode == ScaleMode::None {
            return target.clone();
        }
        target.map(|v| (v - self.means[0]) / self.sds[0])
    }

    /// Maps model outputs back to price units.
    pub fn inverse_target(&self, scaled: &Tensor) -> Tensor {
        if self.mode == ScaleMode::None {
            return scaled.clone();
        }
        scaled.map(|v| v * self.sds[0] + self.means[0])
    }

    /// Applies the transform to raw window samples, producing what the
    /// trainer consumes.
    pub fn transform_samples(&self, samples: &[WindowSample]) -> Result<Vec<TrainSample>> {
        samples
            .iter()
            .map(|s| {
                Ok(TrainSample {
                    input: self.transform_input(&s.input)?,
                    target: self.transform_target(&s.target),
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bar(open: f64, volume: u64) -> DailyBar {
        DailyBar {
            date: "2013-01-07".parse().unwrap(),
            open,
            high: open + 1.0,
            low: open - 1.0,
            close: open + 0.5,
            volume,
        }
    }

    #[test]
    fn zscore_normalizes_train_stats() {
        let bars: Vec<DailyBar> = (0..100).map(|i| bar(600.0 + i as f64, 1000 + i)).collect();
        let scaler = Scaler::fit(ScaleMode::ZScore, &bars, FeatureSet::Univariate).unwrap();
        let window = Tensor::from_vec(&[2, 1], vec![600.0, 699.0]).unwrap();
        let scaled = scaler.transform_input(&window).unwrap();
        // Mean 649.5; both ends symmetric around it.
        assert!((scaled.data()[0] + scaled.data()[1]).abs() < 1e-12);
        let back = scaler.inverse_target(&scaler.transform_target(&window.reshaped(&[2]).unwrap()));
        assert!((back.data()[0] - 600.0).abs() < 1e-9);
        assert!((back.data()[1] - 699.0).abs() < 1e-9);
    }

    #[test]
    fn constant_series_stays_invertible() {
        let bars: Vec<DailyBar> = (0..10).map(|_| bar(500.0, 10)).collect();
        let scaler = Scaler::fit(ScaleMode::ZScore, &bars, FeatureSet::Univariate).unwrap();
        let t = Tensor::from_vec(&[5], vec![500.0; 5]).unwrap();
        let z = scaler.transform_target(&t);
        assert!(z.data().iter().all(|&v| v == 0.0));
        let back = scaler.inverse_target(&z);
        assert_eq!(back.data(), t.data());
    }

    #[test]
    fn volume_column_scaled_independently() {
        let bars: Vec<DailyBar> =
            (0..50).map(|i| bar(600.0 + (i % 7) as f64, 10_000 + 100 * i)).collect();
        let scaler = Scaler::fit(ScaleMode::ZScore, &bars, FeatureSet::Multivariate).unwrap();
        let window = super::super::window_tensor(&bars[..10], FeatureSet::Multivariate).unwrap();
        let scaled = scaler.transform_input(&window).unwrap();
        // All columns land on comparable scales.
        for row in 0..10 {
            for col in 0..5 {
                assert!(scaled.get2(row, col).abs() < 5.0);
            }
        }
    }

    #[test]
    fn none_mode_is_identity() {
        let scaler = Scaler::identity(FeatureSet::Univariate);
        let w = Tensor::from_vec(&[2, 1], vec![1.5, 2.5]).unwrap();
        assert_eq!(scaler.transform_input(&w).unwrap().data(), w.data());
        let t = Tensor::from_vec(&[2], vec![1.5, 2.5]).unwrap();
        assert_eq!(scaler.inverse_target(&t).data(), t.data());
    }
}
