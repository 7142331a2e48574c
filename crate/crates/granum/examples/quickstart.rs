//! Minimal library walkthrough: generate a synthetic series, train one
//! model, and walk the test weeks.
//!
//! ```sh
//! cargo run --release -p granum --example quickstart
//! ```

use granum::data::scale::ScaleMode;
use granum::data::synth::{generate, SynthConfig};
use granum::data::{build_weeks, split, FeatureSet};
use granum::walkforward::{prepare_training, walk_forward_evaluate};
use granum_core::models::{build, train, BuildConfig, ModelId, TrainConfig};
use granum_core::RandomSource;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // 40 trading weeks of drift + weekly seasonality + noise.
    let bars = generate(&SynthConfig { weeks: 40, seed: 7, ..SynthConfig::default() })?;
    let (weeks, dropped) = build_weeks(&bars);
    assert!(dropped.is_empty());

    // First 30 weeks train, last 10 walk forward.
    let boundary = weeks[29].week_end();
    let dataset = split(weeks, boundary)?;

    let model = ModelId::Cnn1;
    let (samples, scaler) = prepare_training(&dataset, 5, FeatureSet::Univariate, ScaleMode::ZScore)?;

    let seed = 42;
    let mut rng = RandomSource::new(seed);
    let mut net = build(model, &BuildConfig::default(), &mut rng)?;
    let log = train(&mut net, &samples, &TrainConfig { seed, ..TrainConfig::default() })?;
    println!(
        "trained {model} on {} windows, final epoch loss {:.6}",
        samples.len(),
        log.final_loss().unwrap()
    );

    let eval = walk_forward_evaluate(&net, &dataset, 5, FeatureSet::Univariate, &scaler)?;
    println!("walked {} test weeks", eval.records.len());
    println!("overall rmse {:.4}  rmse/mean {:.5}", eval.overall_rmse, eval.ratio);
    for (day, rmse) in ["mon", "tue", "wed", "thu", "fri"].iter().zip(eval.per_day_rmse) {
        println!("  {day} rmse {rmse:.4}");
    }
    Ok(())
}
