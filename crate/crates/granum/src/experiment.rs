//! Seeded multi-round experiment runner and result aggregation.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use granum_core::models::{build, train, BuildConfig, ModelId, ModelSpec, TrainConfig};
use granum_core::{RandomSource, TrainSample};

use crate::data::scale::{ScaleMode, Scaler};
use crate::data::{FeatureSet, SeriesDataset};
use crate::error::{Error, Result};
use crate::walkforward::{
    round_centis, walk_forward_evaluate, walk_forward_evaluate_retraining, EvaluationResult,
};

/// How wall time is reported. `Fixed` writes 0.00 everywhere so two runs of
/// the same experiment produce byte-identical result files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeMode {
    Wall,
    Fixed,
}

impl TimeMode {
    pub fn name(self) -> &'static str {
        match self {
            TimeMode::Wall => "wall",
            TimeMode::Fixed => "fixed",
        }
    }

    pub fn from_name(name: &str) -> Option<TimeMode> {
        match name {
            "wall" => Some(TimeMode::Wall),
            "fixed" => Some(TimeMode::Fixed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RetrainMode {
    None,
    Weekly,
}

impl RetrainMode {
    pub fn name(self) -> &'static str {
        match self {
            RetrainMode::None => "none",
            RetrainMode::Weekly => "weekly",
        }
    }

    pub fn from_name(name: &str) -> Option<RetrainMode> {
        match name {
            "none" => Some(RetrainMode::None),
            "weekly" => Some(RetrainMode::Weekly),
            _ => None,
        }
    }
}

/// Everything an experiment run needs beyond the dataset.
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub rounds: usize,
    pub base_seed: u64,
    pub train: TrainConfig,
    pub build: BuildConfig,
    pub scale: ScaleMode,
    pub retrain: RetrainMode,
    pub time_mode: TimeMode,
    pub jobs: usize,
    pub save_weights: bool,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            rounds: 10,
            base_seed: 42,
            train: TrainConfig::default(),
            build: BuildConfig::default(),
            scale: ScaleMode::ZScore,
            retrain: RetrainMode::None,
            time_mode: TimeMode::Wall,
            jobs: 1,
            save_weights: false,
        }
    }
}

/// Window length and feature set a model consumes.
pub fn model_features(id: ModelId) -> (usize, FeatureSet) {
    let spec = ModelSpec::of(id);
    let features =
        if spec.is_multivariate() { FeatureSet::Multivariate } else { FeatureSet::Univariate };
    (spec.window_days(), features)
}

/// Training tensors and the fitted scaler for one model's input layout;
/// shared read-only across that model's rounds.
#[derive(Debug, Clone)]
pub struct PreparedModel {
    pub samples: Vec<TrainSample>,
    pub scaler: Scaler,
    pub n_days: usize,
    pub features: FeatureSet,
}

pub fn prepare_model(
    dataset: &SeriesDataset,
    id: ModelId,
    scale: ScaleMode,
) -> Result<PreparedModel> {
    let (n_days, features) = model_features(id);
    let (samples, scaler) = crate::walkforward::prepare_training(dataset, n_days, features, scale)?;
    Ok(PreparedModel { samples, scaler, n_days, features })
}

/// One seeded train-and-evaluate run.
#[derive(Debug, Clone)]
pub struct RoundResult {
    pub model: ModelId,
    /// 1-based round index.
    pub round: usize,
    pub seed: u64,
    pub eval: EvaluationResult,
}

/// A round plus its serialized weights when requested.
#[derive(Debug, Clone)]
pub struct RoundOutcome {
    pub result: RoundResult,
    pub weights_doc: Option<String>,
}

/// Builds fresh weights from `base_seed + round`, trains on the prepared
/// samples, and walks the test weeks. Wall time covers train plus walk.
pub fn run_round(
    dataset: &SeriesDataset,
    id: ModelId,
    prep: &PreparedModel,
    settings: &RunSettings,
    round_idx: usize,
) -> Result<RoundOutcome> {
    let seed = settings.base_seed.wrapping_add(round_idx as u64);
    let started = Instant::now();
    let mut rng = RandomSource::new(seed);
    let mut net = build(id, &settings.build, &mut rng)?;
    let cfg = TrainConfig { seed, ..settings.train.clone() };
    train(&mut net, &prep.samples, &cfg)?;
    let mut eval = match settings.retrain {
        RetrainMode::None => {
            walk_forward_evaluate(&net, dataset, prep.n_days, prep.features, &prep.scaler)?
        }
        RetrainMode::Weekly => walk_forward_evaluate_retraining(
            &mut net,
            dataset,
            prep.n_days,
            prep.features,
            &prep.scaler,
            &cfg,
        )?,
    };
    eval.wall_time_seconds = match settings.time_mode {
        TimeMode::Wall => round_centis(started.elapsed().as_secs_f64()),
        TimeMode::Fixed => 0.0,
    };
    let weights_doc = settings.save_weights.then(|| granum_core::weights::encode(id, &net));
    Ok(RoundOutcome {
        result: RoundResult { model: id, round: round_idx + 1, seed, eval },
        weights_doc,
    })
}

/// Runs all rounds of one model sequentially.
pub fn run_rounds(
    dataset: &SeriesDataset,
    id: ModelId,
    settings: &RunSettings,
) -> Result<Vec<RoundOutcome>> {
    if settings.rounds == 0 {
        return Err(Error::Config("rounds must be at least 1".into()));
    }
    let prep = prepare_model(dataset, id, settings.scale)?;
    (0..settings.rounds).map(|i| run_round(dataset, id, &prep, settings, i)).collect()
}

/// Mean/min/max/sample-SD of one metric column. SD uses the n-1 denominator
/// and is absent for a single round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub sd: Option<f64>,
}

pub fn column_stats(values: &[f64]) -> Result<ColumnStats> {
    if values.is_empty() {
        return Err(Error::Data("cannot summarize an empty column".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let mut min = values[0];
    let mut max = values[0];
    for &v in values {
        if v < min {
            min = v;
        }
        if v > max {
            max = v;
        }
    }
    let sd = if values.len() >= 2 {
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        Some((ss / (n - 1.0)).sqrt())
    } else {
        None
    };
    Ok(ColumnStats { mean, min, max, sd })
}

/// Aggregates of one model's rounds: the overall RMSE column, the five
/// weekday columns, execution time, and the RMSE-to-mean ratios.
#[derive(Debug, Clone)]
pub struct SummaryStats {
    pub rmse: ColumnStats,
    pub days: [ColumnStats; 5],
    pub time: ColumnStats,
    pub mean_ratio: f64,
    pub per_day_mean_ratio: [f64; 5],
}

pub fn summarize(rounds: &[RoundResult]) -> Result<SummaryStats> {
    if rounds.is_empty() {
        return Err(Error::Data("cannot summarize zero rounds".into()));
    }
    let rmse = column_stats(&rounds.iter().map(|r| r.eval.overall_rmse).collect::<Vec<_>>())?;
    let mut days = [ColumnStats { mean: 0.0, min: 0.0, max: 0.0, sd: None }; 5];
    let mut per_day_mean_ratio = [0.0; 5];
    for d in 0..5 {
        days[d] = column_stats(&rounds.iter().map(|r| r.eval.per_day_rmse[d]).collect::<Vec<_>>())?;
        per_day_mean_ratio[d] =
            rounds.iter().map(|r| r.eval.per_day_ratio[d]).sum::<f64>() / rounds.len() as f64;
    }
    let time = column_stats(&rounds.iter().map(|r| r.eval.wall_time_seconds).collect::<Vec<_>>())?;
    let mean_ratio = rounds.iter().map(|r| r.eval.ratio).sum::<f64>() / rounds.len() as f64;
    Ok(SummaryStats { rmse, days, time, mean_ratio, per_day_mean_ratio })
}

/// One line of the cross-model comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub model: ModelId,
    pub mean_time: f64,
    pub mean_ratio: f64,
    pub time_rank: usize,
    pub ratio_rank: usize,
}

fn ranks_ascending(entries: &[(ModelId, f64)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..entries.len()).collect();
    order.sort_by(|&a, &b| {
        entries[a]
            .1
            .partial_cmp(&entries[b].1)
            .expect("metric values are finite")
            .then(entries[a].0.cmp(&entries[b].0))
    });
    let mut ranks = vec![0usize; entries.len()];
    for (pos, &i) in order.iter().enumerate() {
        ranks[i] = pos + 1;
    }
    ranks
}

/// Ranks models independently on mean execution time and mean RMSE/mean
/// ratio (both ascending). Ties break by model enumeration order.
pub fn rank_models(entries: &[(ModelId, f64, f64)]) -> Vec<ComparisonRow> {
    let time_ranks = ranks_ascending(&entries.iter().map(|e| (e.0, e.1)).collect::<Vec<_>>());
    let ratio_ranks = ranks_ascending(&entries.iter().map(|e| (e.0, e.2)).collect::<Vec<_>>());
    entries
        .iter()
        .zip(time_ranks.iter().zip(&ratio_ranks))
        .map(|(&(model, mean_time, mean_ratio), (&time_rank, &ratio_rank))| ComparisonRow {
            model,
            mean_time,
            mean_ratio,
            time_rank,
            ratio_rank,
        })
        .collect()
}

/// Full experiment output: per-model rounds and summaries plus the ranking.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub per_model: Vec<(ModelId, Vec<RoundOutcome>, SummaryStats)>,
    pub comparison: Vec<ComparisonRow>,
}

/// Runs `rounds` seeded rounds for every requested model, fanning the
/// (model, round) task list across `jobs` worker threads. Results are
/// deterministic for a fixed (data, settings) pair regardless of `jobs`.
pub fn run_experiment(
    dataset: &SeriesDataset,
    models: &[ModelId],
    settings: &RunSettings,
) -> Result<ExperimentOutput> {
    if models.is_empty() {
        return Err(Error::Config("no models requested".into()));
    }
    if settings.rounds == 0 {
        return Err(Error::Config("rounds must be at least 1".into()));
    }
    let preps: Vec<PreparedModel> = models
        .iter()
        .map(|&id| prepare_model(dataset, id, settings.scale))
        .collect::<Result<_>>()?;

    let tasks: Vec<(usize, usize)> =
        (0..models.len()).flat_map(|m| (0..settings.rounds).map(move |r| (m, r))).collect();
    let slots: Mutex<Vec<Option<Result<RoundOutcome>>>> =
        Mutex::new((0..tasks.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = settings.jobs.max(1).min(tasks.len());

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let t = next.fetch_add(1, Ordering::Relaxed);
                if t >= tasks.len() {
                    break;
                }
                let (m, r) = tasks[t];
                let outcome = run_round(dataset, models[m], &preps[m], settings, r);
                slots.lock().expect("result mutex")[t] = Some(outcome);
            });
        }
    });

    let collected = slots.into_inner().expect("result mutex");
    let mut per_model: Vec<(ModelId, Vec<RoundOutcome>, SummaryStats)> = Vec::new();
    let mut iter = collected.into_iter();
    for &id in models {
        let mut outcomes = Vec::with_capacity(settings.rounds);
        for _ in 0..settings.rounds {
            outcomes.push(iter.next().expect("slot per task").expect("slot filled")?);
        }
        let results: Vec<RoundResult> = outcomes.iter().map(|o| o.result.clone()).collect();
        let summary = summarize(&results)?;
        per_model.push((id, outcomes, summary));
    }
    let comparison = rank_models(
        &per_model.iter().map(|(id, _, s)| (*id, s.time.mean, s.mean_ratio)).collect::<Vec<_>>(),
    );
    Ok(ExperimentOutput { per_model, comparison })
}

#[cfg(test)]
pub(crate) mod fixtures {
    use granum_core::models::ModelId;

    /// Published per-round RMSE values for the one-week univariate CNN.
    pub(crate) const CNN1_RMSE: [f64; 10] =
        [3.840, 5.471, 4.370, 3.804, 3.840, 3.964, 4.138, 3.852, 4.364, 3.944];

    /// Published comparison table: (model, mean seconds, mean ratio).
    pub(crate) fn published_comparison() -> Vec<(ModelId, f64, f64)> {
        vec![
            (ModelId::Cnn1, 83.42, 0.00662),
            (ModelId::Cnn2, 87.29, 0.00625),
            (ModelId::Cnn3, 116.45, 0.00905),
            (ModelId::Lstm1, 330.75, 0.00711),
            (ModelId::Lstm2, 544.42, 0.00710),
            (ModelId::Lstm3, 306.41, 0.00839),
            (ModelId::Lstm4, 838.92, 0.11461),
        ]
    }
}
