//! The seven weekly forecast architectures, plus training and prediction.
//!
//! Every model maps a window of daily feature rows to the five open prices
//! of the following trading week:
//!
//! * cnn1 / cnn2   - univariate convolutional net, one / two week window
//! * cnn3          - multivariate convolutional net, two week window
//! * lstm1 / lstm2 - univariate recurrent net, one / two week window
//! * lstm3         - univariate encoder-decoder, two week window
//! * lstm4         - multivariate encoder-decoder, two week window

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::activations::Activation;
use crate::adam::{AdamConfig, AdamState};
use crate::conv::Conv1DLayer;
use crate::dense::DenseLayer;
use crate::error::{Error, Result};
use crate::layer::Layer;
use crate::loss::mse_loss;
use crate::lstm::{LstmLayer, LstmMode};
use crate::network::Network;
use crate::pool::MaxPool1DLayer;
use crate::reshape::{FlattenLayer, RepeatVectorLayer, TimeDistributedDenseLayer};
use crate::rng::{RandomSource, SHUFFLE_STREAM};
use crate::tensor::Tensor;

/// Forecast horizon: open prices for Monday through Friday of the next week.
pub const HORIZON: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelId {
    Cnn1,
    Cnn2,
    Cnn3,
    Lstm1,
    Lstm2,
    Lstm3,
    Lstm4,
}

impl ModelId {
    pub const ALL: [ModelId; 7] = [
        ModelId::Cnn1,
        ModelId::Cnn2,
        ModelId::Cnn3,
        ModelId::Lstm1,
        ModelId::Lstm2,
        ModelId::Lstm3,
        ModelId::Lstm4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelId::Cnn1 => "cnn1",
            ModelId::Cnn2 => "cnn2",
            ModelId::Cnn3 => "cnn3",
            ModelId::Lstm1 => "lstm1",
            ModelId::Lstm2 => "lstm2",
            ModelId::Lstm3 => "lstm3",
            ModelId::Lstm4 => "lstm4",
        }
    }

    /// Display name in the style of the result tables.
    pub fn table_name(self) -> &'static str {
        match self {
            ModelId::Cnn1 => "CNN #1",
            ModelId::Cnn2 => "CNN #2",
            ModelId::Cnn3 => "CNN #3",
            ModelId::Lstm1 => "LSTM #1",
            ModelId::Lstm2 => "LSTM #2",
            ModelId::Lstm3 => "LSTM #3",
            ModelId::Lstm4 => "LSTM #4",
        }
    }

    pub fn from_name(name: &str) -> Option<ModelId> {
        let lower: String = name.trim().to_lowercase();
        ModelId::ALL.into_iter().find(|m| m.name() == lower)
    }
}

impl core::fmt::Display for ModelId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// Fixed input/output contract of one architecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelSpec {
    pub id: ModelId,
    /// (window days, features per day)
    pub input_shape: (usize, usize),
    pub output_len: usize,
}

impl ModelSpec {
    pub fn of(id: ModelId) -> ModelSpec {
        let input_shape = match id {
            ModelId::Cnn1 | ModelId::Lstm1 => (5, 1),
            ModelId::Cnn2 | ModelId::Lstm2 | ModelId::Lstm3 => (10, 1),
            ModelId::Cnn3 | ModelId::Lstm4 => (10, 5),
        };
        ModelSpec { id, input_shape, output_len: HORIZON }
    }

    pub fn window_days(&self) -> usize {
        self.input_shape.0
    }

    pub fn feature_count(&self) -> usize {
        self.input_shape.1
    }

    pub fn is_multivariate(&self) -> bool {
        self.input_shape.1 > 1
    }
}

/// Layer widths that are not pinned by the architecture itself. Defaults
/// reproduce the published stacks; the gradient checker shrinks them so a
/// full finite-difference sweep stays cheap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildConfig {
    /// Filters in the single conv layer of cnn1/cnn2.
    pub conv_filters: usize,
    pub conv_kernel: usize,
    /// Hidden dense width of cnn1/cnn2.
    pub cnn_hidden: usize,
    /// Filters in the first two conv layers of cnn3.
    pub cnn3_filters: usize,
    pub cnn3_kernel: usize,
    /// Filters in the third conv layer of cnn3.
    pub cnn3_tail_filters: usize,
    /// Kernel of the third conv layer of cnn3. With a two-week input the
    /// sequence 10 -> conv3 -> conv3 -> pool2 -> conv -> pool2 only stays
    /// nonempty for kernel 2, so that is the default.
    pub cnn3_tail_kernel: usize,
    /// Hidden dense width of cnn3.
    pub cnn3_hidden: usize,
    /// LSTM state width for all recurrent models.
    pub lstm_units: usize,
    /// Dense width between the recurrent stack and the output.
    pub lstm_hidden: usize,
    /// Initial forget-gate bias (0.0 by default, 1.0 is the common
    /// alternative).
    pub forget_gate_bias: f64,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            conv_filters: 16,
            conv_kernel: 3,
            cnn_hidden: 10,
            cnn3_filters: 32,
            cnn3_kernel: 3,
            cnn3_tail_filters: 16,
            cnn3_tail_kernel: 2,
            cnn3_hidden: 100,
            lstm_units: 200,
            lstm_hidden: 100,
            forget_gate_bias: 0.0,
        }
    }
}

impl BuildConfig {
    /// Small widths with the same topology; full finite-difference sweeps
    /// over every parameter finish in milliseconds at these sizes.
    pub fn reduced() -> BuildConfig {
        BuildConfig {
            conv_filters: 4,
            conv_kernel: 3,
            cnn_hidden: 6,
            cnn3_filters: 5,
            cnn3_kernel: 3,
            cnn3_tail_filters: 4,
            cnn3_tail_kernel: 2,
            cnn3_hidden: 8,
            lstm_units: 6,
            lstm_hidden: 7,
            forget_gate_bias: 0.0,
        }
    }
}

/// Builds a freshly initialized network for `id`. Weight draws come from
/// `rng` in layer order, so (seed, config) fully determines the result.
pub fn build(id: ModelId, cfg: &BuildConfig, rng: &mut RandomSource) -> Result<Network> {
    let spec = ModelSpec::of(id);
    let (days, feats) = spec.input_shape;
    let mut layers: Vec<Layer> = Vec::new();
    let mut shape = vec![days, feats];

    let push = |layers: &mut Vec<Layer>, shape: &mut Vec<usize>, layer: Layer| -> Result<()> {
        *shape = layer.output_shape(shape).map_err(|e| {
            Error::Config(format!(
                "{id}: layer {} ({}) rejects its input: {e}",
                layers.len(),
                layer.kind()
            ))
        })?;
        layers.push(layer);
        Ok(())
    };

    match id {
        ModelId::Cnn1 | ModelId::Cnn2 => {
            push(
                &mut layers,
                &mut shape,
                Layer::Conv1D(Conv1DLayer::new(
                    cfg.conv_filters,
                    cfg.conv_kernel,
                    feats,
                    Activation::Relu,
                    rng,
                )?),
            )?;
            push(&mut layers, &mut shape, Layer::MaxPool1D(MaxPool1DLayer::new(2)))?;
            push(&mut layers, &mut shape, Layer::Flatten(FlattenLayer::new()))?;
            let flat = shape[0];
            push(
                &mut layers,
                &mut shape,
                Layer::Dense(DenseLayer::new(flat, cfg.cnn_hidden, Activation::Relu, rng)?),
            )?;
            push(
                &mut layers,
                &mut shape,
                Layer::Dense(DenseLayer::new(cfg.cnn_hidden, HORIZON, Activation::Identity, rng)?),
            )?;
        }
        ModelId::Cnn3 => {
            push(
                &mut layers,
                &mut shape,
                Layer::Conv1D(Conv1DLayer::new(
                    cfg.cnn3_filters,
                    cfg.cnn3_kernel,
                    feats,
                    Activation::Relu,
                    rng,
                )?),
            )?;
            push(
                &mut layers,
                &mut shape,
                Layer::Conv1D(Conv1DLayer::new(
                    cfg.cnn3_filters,
                    cfg.cnn3_kernel,
                    cfg.cnn3_filters,
                    Activation::Relu,
                    rng,
                )?),
            )?;
            push(&mut layers, &mut shape, Layer::MaxPool1D(MaxPool1DLayer::new(2)))?;
            push(
                &mut layers,
                &mut shape,
                Layer::Conv1D(Conv1DLayer::new(
                    cfg.cnn3_tail_filters,
                    cfg.cnn3_tail_kernel,
                    cfg.cnn3_filters,
                    Activation::Relu,
                    rng,
                )?),
            )?;
            push(&mut layers, &mut shape, Layer::MaxPool1D(MaxPool1DLayer::new(2)))?;
            push(&mut layers, &mut shape, Layer::Flatten(FlattenLayer::new()))?;
            let flat = shape[0];
            push(
                &mut layers,
                &mut shape,
                Layer::Dense(DenseLayer::new(flat, cfg.cnn3_hidden, Activation::Relu, rng)?),
            )?;
            push(
                &mut layers,
                &mut shape,
                Layer::Dense(DenseLayer::new(cfg.cnn3_hidden, HORIZON, Activation::Identity, rng)?),
            )?;
        }
        ModelId::Lstm1 | ModelId::Lstm2 => {
            push(
                &mut layers,
                &mut shape,
                Layer::Lstm(LstmLayer::new(
                    feats,
                    cfg.lstm_units,
                    LstmMode::ReturnLast,
                    cfg.forget_gate_bias,
                    rng,
                )?),
            )?;
            push(
                &mut layers,
                &mut shape,
                Layer::Dense(DenseLayer::new(
                    cfg.lstm_units,
                    cfg.lstm_hidden,
                    Activation::Relu,
                    rng,
                )?),
            )?;
            push(
                &mut layers,
                &mut shape,
                Layer::Dense(DenseLayer::new(cfg.lstm_hidden, HORIZON, Activation::Identity, rng)?),
            )?;
        }
        ModelId::Lstm3 | ModelId::Lstm4 => {
            push(
                &mut layers,
                &mut shape,
                Layer::Lstm(LstmLayer::new(
                    feats,
                    cfg.lstm_units,
                    LstmMode::ReturnLast,
                    cfg.forget_gate_bias,
                    rng,
                )?),
            )?;
            push(&mut layers, &mut shape, Layer::RepeatVector(RepeatVectorLayer::new(HORIZON)))?;
            push(
                &mut layers,
                &mut shape,
                Layer::Lstm(LstmLayer::new(
                    cfg.lstm_units,
                    cfg.lstm_units,
                    LstmMode::ReturnSequence,
                    cfg.forget_gate_bias,
                    rng,
                )?),
            )?;
            push(
                &mut layers,
                &mut shape,
                Layer::TimeDistributedDense(TimeDistributedDenseLayer::new(
                    cfg.lstm_units,
                    cfg.lstm_hidden,
                    Activation::Relu,
                    rng,
                )?),
            )?;
            push(
                &mut layers,
                &mut shape,
                Layer::TimeDistributedDense(TimeDistributedDenseLayer::new(
                    cfg.lstm_hidden,
                    1,
                    Activation::Identity,
                    rng,
                )?),
            )?;
            push(&mut layers, &mut shape, Layer::Flatten(FlattenLayer::new()))?;
        }
    }

    if shape != [HORIZON] {
        return Err(Error::Config(format!(
            "{id}: configured stack emits {shape:?}, expected [{HORIZON}]"
        )));
    }
    Network::new(layers, vec![days, feats])
}

/// One supervised example: an input window and the five target opens.
#[derive(Debug, Clone)]
pub struct TrainSample {
    pub input: Tensor,
    pub target: Tensor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub adam: AdamConfig,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 20,
            batch_size: 4,
            seed: 42,
            adam: AdamConfig::default(),
            shuffle: true,
        }
    }
}

/// Per-epoch mean training loss.
#[derive(Debug, Clone, Default)]
pub struct TrainLog {
    pub epoch_losses: Vec<f64>,
}

impl TrainLog {
    pub fn final_loss(&self) -> Option<f64> {
        self.epoch_losses.last().copied()
    }
}

/// Mini-batch Adam training. Gradients are averaged over each batch; the
/// trailing short batch is kept. Deterministic given (seed, data, config).
pub fn train(net: &mut Network, samples: &[TrainSample], cfg: &TrainConfig) -> Result<TrainLog> {
    if samples.is_empty() {
        return Err(Error::Data("training sample list is empty".into()));
    }
    if cfg.epochs == 0 {
        return Err(Error::Config("epochs must be at least 1".into()));
    }
    if cfg.batch_size == 0 {
        return Err(Error::Config("batch size must be at least 1".into()));
    }
    for (i, s) in samples.iter().enumerate() {
        if s.input.shape() != net.input_shape() {
            return Err(Error::Shape(format!(
                "sample {i} input {:?} does not match network input {:?}",
                s.input.shape(),
                net.input_shape()
            )));
        }
        if s.target.shape() != net.output_shape() {
            return Err(Error::Shape(format!(
                "sample {i} target {:?} does not match network output {:?}",
                s.target.shape(),
                net.output_shape()
            )));
        }
    }

    let mut opt = AdamState::new(cfg.adam);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    // A dedicated stream keeps batch order independent of the weight draws.
    let mut rng = RandomSource::new(cfg.seed ^ SHUFFLE_STREAM);
    let mut log = TrainLog::default();

    for _ in 0..cfg.epochs {
        if cfg.shuffle {
            rng.shuffle(&mut order);
        }
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            net.zero_grads();
            for &idx in batch {
                let sample = &samples[idx];
                let out = net.forward_train(&sample.input)?;
                let (loss, dloss) = mse_loss(&out, &sample.target)?;
                epoch_loss += loss;
                net.backward(&dloss)?;
            }
            net.scale_grads(1.0 / batch.len() as f64);
            opt.step_network(net)?;
        }
        log.epoch_losses.push(epoch_loss / samples.len() as f64);
    }
    net.clear_caches();
    Ok(log)
}

/// Pure forecast of the five next-week opens for one input window.
pub fn predict(net: &Network, window: &Tensor) -> Result<Tensor> {
    net.infer(window)
}
