//! Text serialization of a trained network.
//!
//! Line-oriented document: a version header, the model id and input shape,
//! one `layer` line per layer with its hyperparameters, and each parameter
//! tensor as a `tensor` header followed by its row-major values. Floats are
//! written with 17 significant digits, so a decode reproduces every f64
//! bit-for-bit. The final `end` line makes truncation detectable.
//!
//! ```text
//! granum-weights 1
//! model cnn1
//! input 5 1
//! layer conv1d filters=16 kernel=3 in_channels=1 activation=relu
//! tensor filters 16 3 1
//! 4.0148106419861936e-1
//! ...
//! end
//! ```

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::activations::Activation;
use crate::conv::Conv1DLayer;
use crate::dense::DenseLayer;
use crate::error::{Error, Result};
use crate::layer::Layer;
use crate::lstm::{LstmLayer, LstmMode, GATE_NAMES};
use crate::models::{ModelId, ModelSpec};
use crate::network::Network;
use crate::pool::MaxPool1DLayer;
use crate::reshape::{FlattenLayer, RepeatVectorLayer, TimeDistributedDenseLayer};
use crate::tensor::Tensor;

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "granum-weights";

fn write_f64(out: &mut String, v: f64) {
    // 16 digits after the point in scientific notation = 17 significant
    // digits, enough to round-trip any finite f64 exactly.
    out.push_str(&format!("{v:.16e}"));
}

fn write_tensor(out: &mut String, name: &str, t: &Tensor) {
    out.push_str("tensor ");
    out.push_str(name);
    for d in t.shape() {
        out.push_str(&format!(" {d}"));
    }
    out.push('\n');
    let width = *t.shape().last().expect("tensors are non-empty");
    for row in t.data().chunks(width) {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            write_f64(out, *v);
        }
        out.push('\n');
    }
}

/// Serializes `net` (built for `id`) into the weight document format.
pub fn encode(id: ModelId, net: &Network) -> String {
    let mut out = String::new();
    out.push_str(&format!("{MAGIC} {FORMAT_VERSION}\n"));
    out.push_str(&format!("model {id}\n"));
    out.push_str("input");
    for d in net.input_shape() {
        out.push_str(&format!(" {d}"));
    }
    out.push('\n');
    for layer in net.layers() {
        match layer {
            Layer::Dense(l) => {
                out.push_str(&format!(
                    "layer dense in={} out={} activation={}\n",
                    l.in_dim(),
                    l.out_dim(),
                    l.activation().name()
                ));
                write_tensor(&mut out, "weight", l.weights());
                write_tensor(&mut out, "bias", l.bias());
            }
            Layer::Conv1D(l) => {
                out.push_str(&format!(
                    "layer conv1d filters={} kernel={} in_channels={} activation={}\n",
                    l.n_filters(),
                    l.kernel(),
                    l.in_channels(),
                    l.activation().name()
                ));
                write_tensor(&mut out, "filters", &l.filters);
                write_tensor(&mut out, "biases", &l.biases);
            }
            Layer::MaxPool1D(l) => {
                out.push_str(&format!("layer maxpool1d pool={}\n", l.pool()));
            }
            Layer::Flatten(_) => {
                out.push_str("layer flatten\n");
            }
            Layer::Lstm(l) => {
                out.push_str(&format!(
                    "layer lstm input={} hidden={} mode={}\n",
                    l.input_size(),
                    l.hidden_size(),
                    l.mode().name()
                ));
                for gate in 0..4 {
                    write_tensor(&mut out, &format!("wx_{}", GATE_NAMES[gate]), &l.wx[gate]);
                }
                for gate in 0..4 {
                    write_tensor(&mut out, &format!("wh_{}", GATE_NAMES[gate]), &l.wh[gate]);
                }
                for gate in 0..4 {
                    write_tensor(&mut out, &format!("b_{}", GATE_NAMES[gate]), &l.b[gate]);
                }
            }
            Layer::RepeatVector(l) => {
                out.push_str(&format!("layer repeat_vector n={}\n", l.repeats()));
            }
            Layer::TimeDistributedDense(l) => {
                out.push_str(&format!(
                    "layer time_distributed_dense in={} out={} activation={}\n",
                    l.in_dim(),
                    l.out_dim(),
                    l.activation().name()
                ));
                write_tensor(&mut out, "weight", &l.w);
                write_tensor(&mut out, "bias", &l.b);
            }
        }
    }
    out.push_str("end\n");
    out
}

struct Reader<'a> {
    lines: core::str::Lines<'a>,
    line_no: usize,
    peeked: Option<&'a str>,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Reader<'a> {
        Reader { lines: text.lines(), line_no: 0, peeked: None }
    }

    fn next_line(&mut self) -> Result<&'a str> {
        if let Some(line) = self.peeked.take() {
            return Ok(line);
        }
        match self.lines.next() {
            Some(line) => {
                self.line_no += 1;
                Ok(line.trim_end())
            }
            None => Err(Error::Persistence("document truncated (missing `end`)".into())),
        }
    }

    fn peek(&mut self) -> Result<&'a str> {
        if self.peeked.is_none() {
            let line = self.next_line()?;
            self.peeked = Some(line);
        }
        Ok(self.peeked.unwrap())
    }

    fn malformed(&self, msg: &str) -> Error {
        Error::Persistence(format!("line {}: {msg}", self.line_no))
    }
}

fn attr<'a>(tokens: &[(&'a str, &'a str)], key: &str, r: &Reader) -> Result<&'a str> {
    tokens
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| r.malformed(&format!("missing attribute `{key}`")))
}

fn attr_usize(tokens: &[(&str, &str)], key: &str, r: &Reader) -> Result<usize> {
    attr(tokens, key, r)?
        .parse::<usize>()
        .map_err(|_| r.malformed(&format!("attribute `{key}` is not an integer")))
}

fn attr_activation(tokens: &[(&str, &str)], r: &Reader) -> Result<Activation> {
    let name = attr(tokens, "activation", r)?;
    Activation::from_name(name).ok_or_else(|| r.malformed(&format!("unknown activation `{name}`")))
}

fn read_tensor(r: &mut Reader, expect_name: &str) -> Result<Tensor> {
    let header = r.next_line()?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some("tensor") {
        return Err(r.malformed(&format!("expected `tensor {expect_name} ...`, got `{header}`")));
    }
    let name = parts.next().ok_or_else(|| r.malformed("tensor header missing name"))?;
    if name != expect_name {
        return Err(r.malformed(&format!("expected tensor `{expect_name}`, found `{name}`")));
    }
    let shape: Vec<usize> = parts
        .map(|p| p.parse::<usize>().map_err(|_| r.malformed("bad tensor dimension")))
        .collect::<Result<_>>()?;
    if shape.is_empty() {
        return Err(r.malformed("tensor header has no shape"));
    }
    let width = *shape.last().unwrap();
    let rows: usize = shape[..shape.len() - 1].iter().product::<usize>().max(1);
    let mut data = Vec::with_capacity(rows * width);
    for _ in 0..rows {
        let line = r.next_line()?;
        let before = data.len();
        for tok in line.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| r.malformed(&format!("bad float `{tok}`")))?;
            data.push(v);
        }
        if data.len() - before != width {
            return Err(r.malformed(&format!(
                "tensor row has {} values, expected {width}",
                data.len() - before
            )));
        }
    }
    Tensor::from_vec(&shape, data)
}

fn parse_attrs(rest: &[&str]) -> Vec<(String, String)> {
    rest.iter()
        .filter_map(|tok| tok.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

/// Parses a weight document back into the model id and its network.
pub fn decode(text: &str) -> Result<(ModelId, Network)> {
    let mut r = Reader::new(text);

    let header = r.next_line()?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some(MAGIC) {
        return Err(Error::Persistence("not a granum weight document".into()));
    }
    let version: u32 = parts
        .next()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| r.malformed("missing format version"))?;
    if version != FORMAT_VERSION {
        return Err(Error::Persistence(format!(
            "unsupported format version {version} (this build reads {FORMAT_VERSION})"
        )));
    }

    let model_line = r.next_line()?;
    let id = model_line
        .strip_prefix("model ")
        .and_then(ModelId::from_name)
        .ok_or_else(|| r.malformed("expected `model <id>`"))?;

    let input_line = r.next_line()?;
    let input_shape: Vec<usize> = input_line
        .strip_prefix("input")
        .ok_or_else(|| r.malformed("expected `input <dims>`"))?
        .split_whitespace()
        .map(|p| p.parse::<usize>().map_err(|_| r.malformed("bad input dimension")))
        .collect::<Result<_>>()?;

    let spec = ModelSpec::of(id);
    if input_shape != [spec.window_days(), spec.feature_count()] {
        return Err(Error::Persistence(format!(
            "document input shape {input_shape:?} does not match {id}'s fixed shape {:?}",
            [spec.window_days(), spec.feature_count()]
        )));
    }

    let mut layers: Vec<Layer> = Vec::new();
    loop {
        let line = r.peek()?;
        if line == "end" {
            r.next_line()?;
            break;
        }
        let line = r.next_line()?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.first() != Some(&"layer") || tokens.len() < 2 {
            return Err(r.malformed(&format!("expected `layer <kind> ...`, got `{line}`")));
        }
        let kind = tokens[1];
        let attrs_owned = parse_attrs(&tokens[2..]);
        let attrs: Vec<(&str, &str)> =
            attrs_owned.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
        let layer = match kind {
            "dense" => {
                let activation = attr_activation(&attrs, &r)?;
                let w = read_tensor(&mut r, "weight")?;
                let b = read_tensor(&mut r, "bias")?;
                Layer::Dense(DenseLayer::from_parts(w, b, activation)?)
            }
            "conv1d" => {
                let activation = attr_activation(&attrs, &r)?;
                let filters = read_tensor(&mut r, "filters")?;
                let biases = read_tensor(&mut r, "biases")?;
                Layer::Conv1D(Conv1DLayer::from_parts(filters, biases, activation)?)
            }
            "maxpool1d" => {
                let pool = attr_usize(&attrs, "pool", &r)?;
                Layer::MaxPool1D(MaxPool1DLayer::new(pool))
            }
            "flatten" => Layer::Flatten(FlattenLayer::new()),
            "lstm" => {
                let mode_name = attr(&attrs, "mode", &r)?;
                let mode = LstmMode::from_name(mode_name)
                    .ok_or_else(|| r.malformed(&format!("unknown lstm mode `{mode_name}`")))?;
                let mut wx = Vec::with_capacity(4);
                let mut wh = Vec::with_capacity(4);
                let mut b = Vec::with_capacity(4);
                for gate in GATE_NAMES {
                    wx.push(read_tensor(&mut r, &format!("wx_{gate}"))?);
                }
                for gate in GATE_NAMES {
                    wh.push(read_tensor(&mut r, &format!("wh_{gate}"))?);
                }
                for gate in GATE_NAMES {
                    b.push(read_tensor(&mut r, &format!("b_{gate}"))?);
                }
                let arr = |mut v: Vec<Tensor>| -> [Tensor; 4] {
                    let d = v.pop().unwrap();
                    let c = v.pop().unwrap();
                    let bb = v.pop().unwrap();
                    let a = v.pop().unwrap();
                    [a, bb, c, d]
                };
                Layer::Lstm(LstmLayer::from_parts(arr(wx), arr(wh), arr(b), mode)?)
            }
            "repeat_vector" => {
                let n = attr_usize(&attrs, "n", &r)?;
                Layer::RepeatVector(RepeatVectorLayer::new(n))
            }
            "time_distributed_dense" => {
                let activation = attr_activation(&attrs, &r)?;
                let w = read_tensor(&mut r, "weight")?;
                let b = read_tensor(&mut r, "bias")?;
                Layer::TimeDistributedDense(TimeDistributedDenseLayer::from_parts(
                    w, b, activation,
                )?)
            }
            other => return Err(r.malformed(&format!("unknown layer kind `{other}`"))),
        };
        layers.push(layer);
    }

    let net = Network::new(layers, input_shape)
        .map_err(|e| Error::Persistence(format!("document layers do not chain: {e}")))?;
    if net.output_shape() != [spec.output_len] {
        return Err(Error::Persistence(format!(
            "document network emits {:?}, expected [{}]",
            net.output_shape(),
            spec.output_len
        )));
    }
    Ok((id, net))
}

/// Like [`decode`], but fails with a shape error when the document does not
/// hold weights for `expected`.
pub fn decode_expecting(expected: ModelId, text: &str) -> Result<Network> {
    let (id, net) = decode(text)?;
    if id != expected {
        return Err(Error::Shape(format!(
            "weight document holds {id}, cannot load into a {expected} plan"
        )));
    }
    Ok(net)
}
