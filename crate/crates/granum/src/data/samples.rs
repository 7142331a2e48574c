//! Supervised window extraction.

use granum_core::Tensor;

use super::{DailyBar, FeatureSet, SeriesDataset};
use crate::date::Date;
use crate::error::{Error, Result};

/// One training example: `n_days` of features and the five following opens.
/// The dates are carried for leakage auditing.
#[derive(Debug, Clone)]
pub struct WindowSample {
    pub input: Tensor,
    pub target: Tensor,
    /// Date of the last input day.
    pub input_end: Date,
    /// Date of the first target day.
    pub target_start: Date,
}

/// Builds the (n_days x width) input tensor for a run of daily bars.
pub fn window_tensor(bars: &[DailyBar], features: FeatureSet) -> Result<Tensor> {
    let width = features.width();
    let mut data = Vec::with_capacity(bars.len() * width);
    for bar in bars {
        data.extend(features.extract(bar));
    }
    Ok(Tensor::from_vec(&[bars.len(), width], data)?)
}

/// Slides a stride-1 window over the training days: input = days
/// [t, t+n_days), target = opens of days [t+n_days, t+n_days+5). Every
/// sample lies entirely inside the training range, so no target can cross
/// the split boundary.
pub fn make_training_samples(
    dataset: &SeriesDataset,
    n_days: usize,
    features: FeatureSet,
) -> Result<Vec<WindowSample>> {
    let bars = dataset.train_bars();
    let horizon = 5;
    if bars.len() < n_days + horizon {
        return Err(Error::Data(format!(
            "training range has {} daily bars; need at least {} for {n_days}-day windows plus a {horizon}-day target",
            bars.len(),
            n_days + horizon
        )));
    }
    let mut samples = Vec::with_capacity(bars.len() - n_days - horizon + 1);
    for t in 0..=bars.len() - n_days - horizon {
        let input_bars = &bars[t..t + n_days];
        let target_bars = &bars[t + n_days..t + n_days + horizon];
        let input = window_tensor(input_bars, features)?;
        let target = Tensor::from_vec(&[horizon], target_bars.iter().map(|b| b.open).collect())?;
        samples.push(WindowSample {
            input,
            target,
            input_end: input_bars[n_days - 1].date,
            target_start: target_bars[0].date,
        });
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synth::{generate, SynthConfig};
    use crate::data::{build_weeks, split};

    fn dataset(weeks: usize, train_weeks: usize) -> SeriesDataset {
        let cfg = SynthConfig { weeks, ..SynthConfig::default() };
        let bars = generate(&cfg).unwrap();
        let (wk, _) = build_weeks(&bars);
        let boundary = wk[train_weeks - 1].week_end();
        split(wk, boundary).unwrap()
    }

    #[test]
    fn window_count_matches_arithmetic() {
        // 3 training weeks = 15 daily bars; 15 - 5 - 5 + 1 = 6 samples.
        let ds = dataset(4, 3);
        let samples = make_training_samples(&ds, 5, FeatureSet::Univariate).unwrap();
        assert_eq!(samples.len(), 6);
    }

    #[test]
    fn too_little_history_is_an_error() {
        // 2 training weeks = 10 bars: no room for a 10-day window plus target.
        let ds = dataset(3, 2);
        assert!(matches!(
            make_training_samples(&ds, 10, FeatureSet::Univariate),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn multivariate_inputs_keep_open_targets() {
        let ds = dataset(5, 4);
        let samples = make_training_samples(&ds, 10, FeatureSet::Multivariate).unwrap();
        assert_eq!(samples[0].input.shape(), &[10, 5]);
        assert_eq!(samples[0].target.shape(), &[5]);
        // Target values are exactly the open column of the following days.
        let bars = ds.train_bars();
        for (i, s) in samples.iter().enumerate() {
            for d in 0..5 {
                assert_eq!(s.target.data()[d], bars[i + 10 + d].open);
            }
        }
    }

    #[test]
    fn no_leakage() {
        let ds = dataset(8, 6);
        for n_days in [5usize, 10] {
            let samples = make_training_samples(&ds, n_days, FeatureSet::Univariate).unwrap();
            for s in &samples {
                assert!(s.input_end < s.target_start);
            }
        }
    }
}
