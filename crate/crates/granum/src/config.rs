//! Effective run configuration: flags override a flat key=value config
//! file, which overrides the `GRANUM_SEED` environment fallback, which
//! overrides built-in defaults. The resolved values are echoed into
//! `<out>/config_used` for provenance.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use granum_core::models::ModelId;

use crate::data::scale::ScaleMode;
use crate::date::Date;
use crate::error::{Error, Result};
use crate::experiment::{RetrainMode, TimeMode};

pub const SEED_ENV: &str = "GRANUM_SEED";

const KEYS: [&str; 14] = [
    "model",
    "data",
    "train-end",
    "rounds",
    "seed",
    "epochs",
    "batch",
    "lr",
    "scale",
    "retrain",
    "jobs",
    "time-mode",
    "out",
    "save-weights",
];

/// Parses a flat `key=value` document; `#` starts a comment line.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: idx + 1,
            msg: format!("expected key=value, got `{line}`"),
        })?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(Error::Parse { line: idx + 1, msg: format!("unknown config key `{key}`") });
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Fully resolved experiment settings.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub models: Vec<ModelId>,
    pub data: PathBuf,
    pub train_end: Date,
    pub rounds: usize,
    pub seed: u64,
    pub epochs: usize,
    pub batch: usize,
    pub learning_rate: f64,
    pub scale: ScaleMode,
    pub retrain: RetrainMode,
    pub jobs: usize,
    pub time_mode: TimeMode,
    pub out: PathBuf,
    pub save_weights: bool,
}

/// Flag values as given on the command line (None = not given).
#[derive(Debug, Clone, Default)]
pub struct ExperimentFlags {
    pub model: Option<String>,
    pub data: Option<PathBuf>,
    pub train_end: Option<String>,
    pub rounds: Option<usize>,
    pub seed: Option<u64>,
    pub epochs: Option<usize>,
    pub batch: Option<usize>,
    pub lr: Option<f64>,
    pub scale: Option<String>,
    pub retrain: Option<String>,
    pub jobs: Option<usize>,
    pub time_mode: Option<String>,
    pub out: Option<PathBuf>,
    pub save_weights: bool,
}

pub fn parse_models(spec: &str) -> Result<Vec<ModelId>> {
    if spec.trim().eq_ignore_ascii_case("all") {
        return Ok(ModelId::ALL.to_vec());
    }
    let mut models = Vec::new();
    for part in spec.split(',') {
        let id = ModelId::from_name(part)
            .ok_or_else(|| Error::Config(format!("unknown model `{}`", part.trim())))?;
        if !models.contains(&id) {
            models.push(id);
        }
    }
    if models.is_empty() {
        return Err(Error::Config("no models requested".into()));
    }
    Ok(models)
}

fn resolve<T, E>(
    flag: Option<T>,
    file: Option<&String>,
    parse: impl Fn(&str) -> std::result::Result<T, E>,
    key: &str,
    default: T,
) -> Result<T>
where
    E: std::fmt::Display,
{
    if let Some(v) = flag {
        return Ok(v);
    }
    if let Some(raw) = file {
        return parse(raw).map_err(|e| Error::Config(format!("config key `{key}`: {e}")));
    }
    Ok(default)
}

impl ExperimentConfig {
    pub fn resolve(
        flags: ExperimentFlags,
        file: &BTreeMap<String, String>,
    ) -> Result<ExperimentConfig> {
        let model_spec = flags.model.or_else(|| file.get("model").cloned()).ok_or_else(|| {
            Error::Config("no model given (flag --model or config key `model`)".into())
        })?;
        let models = parse_models(&model_spec)?;

        let data = flags.data.or_else(|| file.get("data").map(PathBuf::from)).ok_or_else(|| {
            Error::Config("no data file given (flag --data or config key `data`)".into())
        })?;

        let train_end_raw = flags
            .train_end
            .or_else(|| file.get("train-end").cloned())
            .unwrap_or_else(|| "2013-12-30".to_string());
        let train_end: Date = train_end_raw.parse()?;

        let env_seed = match std::env::var(SEED_ENV) {
            Ok(v) => Some(v.parse::<u64>().map_err(|_| {
                Error::Config(format!("{SEED_ENV} must be an unsigned integer, got `{v}`"))
            })?),
            Err(_) => None,
        };
        let seed = match (flags.seed, file.get("seed"), env_seed) {
            (Some(s), _, _) => s,
            (None, Some(raw), _) => raw
                .parse::<u64>()
                .map_err(|_| Error::Config(format!("config key `seed`: bad integer `{raw}`")))?,
            (None, None, Some(s)) => s,
            (None, None, None) => 42,
        };

        let rounds = resolve(flags.rounds, file.get("rounds"), str::parse::<usize>, "rounds", 10)?;
        let epochs = resolve(flags.epochs, file.get("epochs"), str::parse::<usize>, "epochs", 20)?;
        let batch = resolve(flags.batch, file.get("batch"), str::parse::<usize>, "batch", 4)?;
        let learning_rate = resolve(flags.lr, file.get("lr"), str::parse::<f64>, "lr", 0.001)?;
        let jobs = resolve(flags.jobs, file.get("jobs"), str::parse::<usize>, "jobs", 1)?;

        let scale_raw = flags.scale.or_else(|| file.get("scale").cloned());
        let scale = match scale_raw.as_deref() {
            None => ScaleMode::ZScore,
            Some(raw) => ScaleMode::from_name(raw).ok_or_else(|| {
                Error::Config(format!("unknown scale mode `{raw}` (none|zscore)"))
            })?,
        };
        let retrain_raw = flags.retrain.or_else(|| file.get("retrain").cloned());
        let retrain = match retrain_raw.as_deref() {
            None => RetrainMode::None,
            Some(raw) => RetrainMode::from_name(raw).ok_or_else(|| {
                Error::Config(format!("unknown retrain mode `{raw}` (none|weekly)"))
            })?,
        };
        let time_raw = flags.time_mode.or_else(|| file.get("time-mode").cloned());
        let time_mode = match time_raw.as_deref() {
            None => TimeMode::Wall,
            Some(raw) => TimeMode::from_name(raw)
                .ok_or_else(|| Error::Config(format!("unknown time mode `{raw}` (wall|fixed)")))?,
        };

        let out = flags
            .out
            .or_else(|| file.get("out").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("results"));
        let save_weights = flags.save_weights
            || file.get("save-weights").map(|v| v == "true" || v == "1").unwrap_or(false);

        if rounds == 0 {
            return Err(Error::Config("rounds must be at least 1".into()));
        }
        if epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if batch == 0 {
            return Err(Error::Config("batch must be at least 1".into()));
        }
        if !(learning_rate > 0.0) {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {learning_rate}"
            )));
        }

        Ok(ExperimentConfig {
            models,
            data,
            train_end,
            rounds,
            seed,
            epochs,
            batch,
            learning_rate,
            scale,
            retrain,
            jobs,
            time_mode,
            out,
            save_weights,
        })
    }

    /// The provenance echo written to `<out>/config_used`.
    pub fn render_used(&self) -> String {
        let models: Vec<&str> = self.models.iter().map(|m| m.name()).collect();
        format!(
            "model={}\ndata={}\ntrain-end={}\nrounds={}\nseed={}\nepochs={}\nbatch={}\nlr={}\nscale={}\nretrain={}\njobs={}\ntime-mode={}\nout={}\nsave-weights={}\n",
            models.join(","),
            self.data.display(),
            self.train_end,
            self.rounds,
            self.seed,
            self.epochs,
            self.batch,
            self.learning_rate,
            self.scale.name(),
            self.retrain.name(),
            self.jobs,
            self.time_mode.name(),
            self.out.display(),
            self.save_weights
        )
    }
}

pub fn load_config_file(path: Option<&Path>) -> Result<BTreeMap<String, String>> {
    match path {
        None => Ok(BTreeMap::new()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            parse_config_file(&text)
        }
    }
}
