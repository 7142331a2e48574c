//! The `granum` command-line interface.
//!
//! Exit codes: 0 success, 1 data/runtime failure, 2 usage error (from the
//! argument parser).

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use granum_core::models::ModelId;

use crate::config::{load_config_file, ExperimentConfig, ExperimentFlags};
use crate::data::scale::{ScaleMode, Scaler};
use crate::data::synth::{generate, SynthConfig};
use crate::data::weeks::exclusion_report;
use crate::data::{
    build_weeks, parse_ticks, read_daily_csv, split, write_daily_csv, SeriesDataset,
};
use crate::date::Date;
use crate::error::{Error, Result, StageExt};
use crate::experiment::{model_features, run_experiment, RunSettings};
use crate::report::emit_report;
use crate::walkforward::walk_forward_evaluate;

#[derive(Parser)]
#[command(
    name = "granum",
    version,
    about = "Weekly stock-price forecasting: CNN/LSTM models, walk-forward evaluation, seeded experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand)]
pub enum Cmd {
    /// Parse 5-minute tick CSV, aggregate to daily bars, report dropped weeks.
    Ingest(IngestArgs),
    /// Generate a deterministic synthetic daily series in the daily-bar schema.
    Synth(SynthArgs),
    /// Train and walk-forward evaluate models over N seeded rounds.
    Experiment(ExperimentArgs),
    /// Walk-forward evaluate saved weights on a dataset.
    Evaluate(EvaluateArgs),
    /// Verify analytic gradients against central finite differences.
    Gradcheck(GradcheckArgs),
    /// Re-render the text report from a stored results directory.
    Report(ReportArgs),
}

#[derive(Args)]
pub struct IngestArgs {
    /// Tick CSV (date,time,open,high,low,close,volume).
    #[arg(long)]
    pub ticks: PathBuf,
    /// Output daily-bar CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Exclusion report path (default: the output path plus `.exclusions.txt`).
    #[arg(long)]
    pub exclusions: Option<PathBuf>,
}

#[derive(Args)]
pub struct SynthArgs {
    /// Number of full trading weeks.
    #[arg(long)]
    pub weeks: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// First Monday of the series.
    #[arg(long, default_value = "2012-12-31")]
    pub start: String,
    #[arg(long, default_value_t = 600.0)]
    pub base: f64,
    #[arg(long, default_value_t = 0.05)]
    pub drift: f64,
    #[arg(long, default_value_t = 20.0)]
    pub amplitude: f64,
    #[arg(long, default_value_t = 5.0)]
    pub period: f64,
    #[arg(long = "noise-sd", default_value_t = 2.0)]
    pub noise_sd: f64,
}

#[derive(Args)]
pub struct ExperimentArgs {
    /// Model id (cnn1..cnn3, lstm1..lstm4), a comma list, or `all`.
    #[arg(long)]
    pub model: Option<String>,
    /// Daily-bar CSV.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Last date of the training range (YYYY-MM-DD).
    #[arg(long = "train-end")]
    pub train_end: Option<String>,
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// Input/target scaling: none or zscore.
    #[arg(long)]
    pub scale: Option<String>,
    /// Walk-forward retraining: none or weekly.
    #[arg(long)]
    pub retrain: Option<String>,
    /// Worker threads for fanning out rounds.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// wall = measured seconds, fixed = 0.00 (byte-reproducible results).
    #[arg(long = "time-mode")]
    pub time_mode: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat key=value config file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Also store each round's weights next to its CSVs.
    #[arg(long = "save-weights", default_value_t = false)]
    pub save_weights: bool,
}

#[derive(Args)]
pub struct EvaluateArgs {
    /// Weight document produced by `experiment --save-weights`.
    #[arg(long)]
    pub weights: PathBuf,
    /// Daily-bar CSV.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long = "train-end")]
    pub train_end: String,
    /// Must match the scaling the weights were trained with.
    #[arg(long, default_value = "zscore")]
    pub scale: String,
    /// Optional path for the per-week forecast CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct GradcheckArgs {
    /// Model id (cnn1..cnn3, lstm1..lstm4) or `all`.
    #[arg(long)]
    pub model: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = granum_core::gradcheck::DEFAULT_H)]
    pub h: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
}

#[derive(Args)]
pub struct ReportArgs {
    /// Results directory written by `experiment`.
    #[arg(long)]
    pub results: PathBuf,
}

fn load_dataset(
    data: &PathBuf,
    train_end: Date,
) -> Result<(SeriesDataset, Vec<crate::data::Exclusion>)> {
    let text = std::fs::read_to_string(data).map_err(|e| Error::io(data, e))?;
    let bars = read_daily_csv(&text).stage("reading daily bars")?;
    let (weeks, excluded) = build_weeks(&bars);
    if weeks.is_empty() {
        return Err(Error::Data("no complete trading weeks in the input".into()));
    }
    let dataset = split(weeks, train_end).stage("splitting at train-end")?;
    if dataset.train_weeks().is_empty() {
        return Err(Error::Data(format!("no training weeks end on or before {train_end}")));
    }
    if dataset.test_weeks().is_empty() {
        return Err(Error::Data(format!("no test weeks after {train_end}")));
    }
    Ok((dataset, excluded))
}

/// Runs one parsed command; `Ok(code)` is the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Ingest(args) => {
            let text =
                std::fs::read_to_string(&args.ticks).map_err(|e| Error::io(&args.ticks, e))?;
            let ticks = parse_ticks(&text).stage("parsing ticks")?;
            let bars = crate::data::aggregate_daily(&ticks);
            crate::data::csv::write_string(&args.out, &write_daily_csv(&bars))
                .stage("writing daily bars")?;
            let (weeks, excluded) = build_weeks(&bars);
            let report_path = args
                .exclusions
                .unwrap_or_else(|| PathBuf::from(format!("{}.exclusions.txt", args.out.display())));
            crate::data::csv::write_string(&report_path, &exclusion_report(&excluded))
                .stage("writing exclusion report")?;
            println!(
                "ingested {} ticks into {} daily bars ({} complete weeks, {} excluded)",
                ticks.len(),
                bars.len(),
                weeks.len(),
                excluded.len()
            );
            Ok(0)
        }
        Cmd::Synth(args) => {
            let cfg = SynthConfig {
                weeks: args.weeks,
                seed: args.seed,
                start: args.start.parse().stage("parsing start date")?,
                base: args.base,
                drift_per_day: args.drift,
                amplitude: args.amplitude,
                period_days: args.period,
                noise_sd: args.noise_sd,
            };
            let bars = generate(&cfg).stage("generating synthetic series")?;
            crate::data::csv::write_string(&args.out, &write_daily_csv(&bars))
                .stage("writing daily bars")?;
            println!(
                "wrote {} daily bars ({} weeks) to {}",
                bars.len(),
                args.weeks,
                args.out.display()
            );
            Ok(0)
        }
        Cmd::Experiment(args) => {
            let file = load_config_file(args.config.as_deref()).stage("loading config file")?;
            let flags = ExperimentFlags {
                model: args.model,
                data: args.data,
                train_end: args.train_end,
                rounds: args.rounds,
                seed: args.seed,
                epochs: args.epochs,
                batch: args.batch,
                lr: args.lr,
                scale: args.scale,
                retrain: args.retrain,
                jobs: args.jobs,
                time_mode: args.time_mode,
                out: args.out,
                save_weights: args.save_weights,
            };
            let cfg = ExperimentConfig::resolve(flags, &file).stage("resolving configuration")?;
            let (dataset, excluded) = load_dataset(&cfg.data, cfg.train_end)?;

            let train = granum_core::models::TrainConfig {
                epochs: cfg.epochs,
                batch_size: cfg.batch,
                adam: granum_core::adam::AdamConfig {
                    learning_rate: cfg.learning_rate,
                    ..Default::default()
                },
                ..Default::default()
            };
            let settings = RunSettings {
                rounds: cfg.rounds,
                base_seed: cfg.seed,
                train,
                build: granum_core::models::BuildConfig::default(),
                scale: cfg.scale,
                retrain: cfg.retrain,
                time_mode: cfg.time_mode,
                jobs: cfg.jobs,
                save_weights: cfg.save_weights,
            };
            let output =
                run_experiment(&dataset, &cfg.models, &settings).stage("running experiment")?;
            emit_report(&output, &cfg.out).stage("writing results")?;
            crate::data::csv::write_string(&cfg.out.join("config_used"), &cfg.render_used())
                .stage("writing config_used")?;
            if !excluded.is_empty() {
                crate::data::csv::write_string(
                    &cfg.out.join("exclusions.txt"),
                    &exclusion_report(&excluded),
                )
                .stage("writing exclusion report")?;
            }
            for (id, _, summary) in &output.per_model {
                println!(
                    "{}: mean rmse {:.4}  rmse/mean {:.5}  mean time {:.2}s",
                    id, summary.rmse.mean, summary.mean_ratio, summary.time.mean
                );
            }
            println!("results written to {}", cfg.out.display());
            Ok(0)
        }
        Cmd::Evaluate(args) => {
            let (id, net) = crate::persist::load_weights(&args.weights).stage("loading weights")?;
            let train_end: Date = args.train_end.parse().stage("parsing train-end")?;
            let (dataset, _) = load_dataset(&args.data, train_end)?;
            let scale = ScaleMode::from_name(&args.scale)
                .ok_or_else(|| Error::Config(format!("unknown scale mode `{}`", args.scale)))?;
            let (n_days, features) = model_features(id);
            let scaler =
                Scaler::fit(scale, &dataset.train_bars(), features).stage("fitting scaler")?;
            let eval = walk_forward_evaluate(&net, &dataset, n_days, features, &scaler)
                .stage("walking the test weeks")?;
            println!("model {id}");
            println!("overall rmse   {:.6}", eval.overall_rmse);
            println!(
                "per-day rmse   mon {:.6}  tue {:.6}  wed {:.6}  thu {:.6}  fri {:.6}",
                eval.per_day_rmse[0],
                eval.per_day_rmse[1],
                eval.per_day_rmse[2],
                eval.per_day_rmse[3],
                eval.per_day_rmse[4]
            );
            println!("test mean open {:.6}", eval.test_mean_open);
            println!("rmse/mean      {:.6}", eval.ratio);
            println!("weeks walked   {}", eval.records.len());
            if let Some(out) = args.out {
                let round = crate::experiment::RoundResult { model: id, round: 1, seed: 0, eval };
                crate::data::csv::write_string(&out, &crate::report::forecasts_csv(&round))
                    .stage("writing forecasts")?;
                println!("forecasts written to {}", out.display());
            }
            Ok(0)
        }
        Cmd::Gradcheck(args) => {
            let models: Vec<ModelId> = if args.model.trim().eq_ignore_ascii_case("all") {
                ModelId::ALL.to_vec()
            } else {
                vec![ModelId::from_name(&args.model)
                    .ok_or_else(|| Error::Config(format!("unknown model `{}`", args.model)))?]
            };
            let mut all_passed = true;
            for id in models {
                let run = crate::gradcheck::run(id, args.seed, args.h, args.tol)
                    .stage("gradient check")?;
                print!("{}", crate::gradcheck::render(&run));
                all_passed &= run.passed();
            }
            Ok(if all_passed { 0 } else { 1 })
        }
        Cmd::Report(args) => {
            let text = crate::report::rerender_from_dir(&args.results).stage("rendering report")?;
            print!("{text}");
            Ok(0)
        }
    }
}
