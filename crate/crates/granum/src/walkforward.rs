//! Walk-forward evaluation over the test weeks.
//!
//! The model is trained once on the training range. The walk then visits
//! each test week in order, forecasting its five opens from the most recent
//! realized daily bars (which straddle the train/test seam as the walk
//! proceeds) and only afterwards appending that week's actual bars to the
//! history. Weights are not retrained during the walk unless the weekly
//! retrain mode is requested.

use std::time::Instant;

use granum_core::models::TrainConfig;
use granum_core::{Network, Tensor};

use crate::data::scale::Scaler;
use crate::data::{make_training_samples, window_tensor, DailyBar, FeatureSet, SeriesDataset};
use crate::date::Date;
use crate::error::{Error, Result};

/// One forecast week: predictions next to realized opens.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastRecord {
    pub week_start: Date,
    pub predicted: [f64; 5],
    pub actual: [f64; 5],
}

/// Metrics of one full walk.
#[derive(Debug, Clone)]
pub struct EvaluationResult {
    /// RMSE over all forecast days, in price units.
    pub overall_rmse: f64,
    /// Monday..Friday RMSE, price units.
    pub per_day_rmse: [f64; 5],
    /// Per-day RMSE divided by the test-range mean open.
    pub per_day_ratio: [f64; 5],
    /// Overall RMSE divided by the test-range mean open.
    pub ratio: f64,
    pub test_mean_open: f64,
    /// Wall-clock seconds, rounded to 0.01 s. Filled in by the caller that
    /// owns the timing policy (train time + walk time).
    pub wall_time_seconds: f64,
    pub records: Vec<ForecastRecord>,
}

/// Root mean squared error between two equally long slices.
pub fn rmse(pred: &[f64], actual: &[f64]) -> Result<f64> {
    if pred.is_empty() || pred.len() != actual.len() {
        return Err(Error::Data(format!(
            "rmse needs equal nonzero lengths, got {} and {}",
            pred.len(),
            actual.len()
        )));
    }
    let sum: f64 = pred.iter().zip(actual).map(|(p, a)| (p - a) * (p - a)).sum();
    Ok((sum / pred.len() as f64).sqrt())
}

/// Per-weekday RMSE across all recorded weeks.
pub fn per_day_rmse(records: &[ForecastRecord]) -> Result<[f64; 5]> {
    if records.is_empty() {
        return Err(Error::Data("no forecast records to score".into()));
    }
    let mut out = [0.0; 5];
    for d in 0..5 {
        let mut sum = 0.0;
        for r in records {
            let e = r.predicted[d] - r.actual[d];
            sum += e * e;
        }
        out[d] = (sum / records.len() as f64).sqrt();
    }
    Ok(out)
}

/// RMSE normalized by the mean level of the target.
pub fn ratio_to_mean(rmse_value: f64, mean_open: f64) -> Result<f64> {
    if !(mean_open > 0.0) {
        return Err(Error::Data(format!("mean open must be positive, got {mean_open}")));
    }
    Ok(rmse_value / mean_open)
}

/// Walks the test weeks, delegating each forecast to `forecast` (which
/// receives the raw, unscaled window). Timing covers only the walk itself.
pub fn walk_forward_with(
    dataset: &SeriesDataset,
    n_days: usize,
    features: FeatureSet,
    forecast: &mut dyn FnMut(&Tensor) -> Result<[f64; 5]>,
) -> Result<EvaluationResult> {
    if dataset.test_weeks().is_empty() {
        return Err(Error::Data("test range is empty".into()));
    }
    let started = Instant::now();
    let mut history: Vec<DailyBar> = dataset.train_bars();
    let mut records = Vec::with_capacity(dataset.test_weeks().len());
    for week in dataset.test_weeks() {
        if history.len() < n_days {
            return Err(Error::Data(format!(
                "only {} realized daily bars before week {}, need {n_days}",
                history.len(),
                week.week_start()
            )));
        }
        let window = window_tensor(&history[history.len() - n_days..], features)?;
        let predicted = forecast(&window)?;
        records.push(ForecastRecord {
            week_start: week.week_start(),
            predicted,
            actual: week.opens(),
        });
        history.extend_from_slice(week.bars());
    }
    let elapsed = started.elapsed().as_secs_f64();
    evaluate_records(records, elapsed)
}

fn evaluate_records(records: Vec<ForecastRecord>, wall_seconds: f64) -> Result<EvaluationResult> {
    let mut sq_sum = 0.0;
    let mut open_sum = 0.0;
    for r in &records {
        for d in 0..5 {
            let e = r.predicted[d] - r.actual[d];
            sq_sum += e * e;
            open_sum += r.actual[d];
        }
    }
    let n = (records.len() * 5) as f64;
    let overall_rmse = (sq_sum / n).sqrt();
    let test_mean_open = open_sum / n;
    let per_day = per_day_rmse(&records)?;
    let ratio = ratio_to_mean(overall_rmse, test_mean_open)?;
    let mut per_day_ratio = [0.0; 5];
    for d in 0..5 {
        per_day_ratio[d] = ratio_to_mean(per_day[d], test_mean_open)?;
    }
    Ok(EvaluationResult {
        overall_rmse,
        per_day_rmse: per_day,
        per_day_ratio,
        ratio,
        test_mean_open,
        wall_time_seconds: round_centis(wall_seconds),
        records,
    })
}

pub(crate) fn round_centis(seconds: f64) -> f64 {
    (seconds * 100.0).round() / 100.0
}

/// Scales the window, runs the frozen network, and maps the forecast back to
/// price units.
pub fn forecast_with_network(net: &Network, scaler: &Scaler, window: &Tensor) -> Result<[f64; 5]> {
    let scaled = scaler.transform_input(window)?;
    let out = net.infer(&scaled)?;
    let priced = scaler.inverse_target(&out);
    let d = priced.data();
    Ok([d[0], d[1], d[2], d[3], d[4]])
}

/// Standard walk: frozen network, history grows week by week.
pub fn walk_forward_evaluate(
    net: &Network,
    dataset: &SeriesDataset,
    n_days: usize,
    features: FeatureSet,
    scaler: &Scaler,
) -> Result<EvaluationResult> {
    walk_forward_with(dataset, n_days, features, &mut |window| {
        forecast_with_network(net, scaler, window)
    })
}

/// Sensitivity mode: after each week's actuals arrive, continue training on
/// every sample the realized history supports before forecasting the next
/// week. Far slower; never the default.
pub fn walk_forward_evaluate_retraining(
    net: &mut Network,
    dataset: &SeriesDataset,
    n_days: usize,
    features: FeatureSet,
    scaler: &Scaler,
    train_cfg: &TrainConfig,
) -> Result<EvaluationResult> {
    if dataset.test_weeks().is_empty() {
        return Err(Error::Data("test range is empty".into()));
    }
    let started = Instant::now();
    let mut history: Vec<DailyBar> = dataset.train_bars();
    let mut records = Vec::with_capacity(dataset.test_weeks().len());
    for week in dataset.test_weeks() {
        if history.len() < n_days {
            return Err(Error::Data(format!(
                "only {} realized daily bars before week {}, need {n_days}",
                history.len(),
                week.week_start()
            )));
        }
        let window = window_tensor(&history[history.len() - n_days..], features)?;
        let predicted = forecast_with_network(net, scaler, &window)?;
        records.push(ForecastRecord {
            week_start: week.week_start(),
            predicted,
            actual: week.opens(),
        });
        history.extend_from_slice(week.bars());

        // Extend the sample set over the realized history and keep training.
        let samples = sliding_samples(&history, n_days, features, scaler)?;
        granum_core::models::train(net, &samples, train_cfg)?;
    }
    let elapsed = started.elapsed().as_secs_f64();
    evaluate_records(records, elapsed)
}

fn sliding_samples(
    bars: &[DailyBar],
    n_days: usize,
    features: FeatureSet,
    scaler: &Scaler,
) -> Result<Vec<granum_core::TrainSample>> {
    let horizon = 5;
    let mut samples = Vec::new();
    for t in 0..=bars.len().saturating_sub(n_days + horizon) {
        let input = window_tensor(&bars[t..t + n_days], features)?;
        let target = Tensor::from_vec(
            &[horizon],
            bars[t + n_days..t + n_days + horizon].iter().map(|b| b.open).collect(),
        )
        .map_err(Error::Core)?;
        samples.push(granum_core::TrainSample {
            input: scaler.transform_input(&input)?,
            target: scaler.transform_target(&target),
        });
    }
    Ok(samples)
}

/// Builds the raw training tensors for a dataset/model pairing and the
/// scaler fitted to its training range.
pub fn prepare_training(
    dataset: &SeriesDataset,
    n_days: usize,
    features: FeatureSet,
    mode: crate::data::scale::ScaleMode,
) -> Result<(Vec<granum_core::TrainSample>, Scaler)> {
    let scaler = Scaler::fit(mode, &dataset.train_bars(), features)?;
    let raw = make_training_samples(dataset, n_days, features)?;
    let samples = scaler.transform_samples(&raw)?;
    Ok((samples, scaler))
}
