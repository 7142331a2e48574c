//! LSTM layer with full backpropagation through time.
//!
//! Gate equations (no peepholes):
//!   f = sigmoid(W_f x + U_f h + b_f)
//!   i = sigmoid(W_i x + U_i h + b_i)
//!   o = sigmoid(W_o x + U_o h + b_o)
//!   g = tanh   (W_c x + U_c h + b_c)
//!   c_t = f * c_prev + i * g
//!   h_t = o * tanh(c_t)
//!
//! The layer reads a (timesteps x features) tensor with h0 = c0 = 0 and
//! returns either the final hidden state or the full hidden sequence.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::activations::{sigmoid, sigmoid_prime_from_output, tanh, tanh_prime_from_output};
use crate::dense::glorot_limit;
use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::tensor::Tensor;

/// Gate indices into the weight arrays.
pub(crate) const GATE_F: usize = 0;
pub(crate) const GATE_I: usize = 1;
pub(crate) const GATE_O: usize = 2;
pub(crate) const GATE_G: usize = 3;

pub(crate) const GATE_NAMES: [&str; 4] = ["f", "i", "o", "c"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LstmMode {
    /// Emit only h_T, shape `[hidden]`.
    ReturnLast,
    /// Emit every h_t, shape `[timesteps, hidden]`.
    ReturnSequence,
}

impl LstmMode {
    pub fn name(self) -> &'static str {
        match self {
            LstmMode::ReturnLast => "last",
            LstmMode::ReturnSequence => "sequence",
        }
    }

    pub fn from_name(name: &str) -> Option<LstmMode> {
        match name {
            "last" => Some(LstmMode::ReturnLast),
            "sequence" => Some(LstmMode::ReturnSequence),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LstmLayer {
    input_size: usize,
    hidden_size: usize,
    pub(crate) mode: LstmMode,
    /// Input weights per gate, each hidden x input.
    pub(crate) wx: [Tensor; 4],
    /// Recurrent weights per gate, each hidden x hidden.
    pub(crate) wh: [Tensor; 4],
    /// Biases per gate, each hidden.
    pub(crate) b: [Tensor; 4],
    pub(crate) gwx: [Tensor; 4],
    pub(crate) gwh: [Tensor; 4],
    pub(crate) gb: [Tensor; 4],
    cache: Option<Vec<StepCache>>,
}

#[derive(Debug, Clone)]
struct StepCache {
    x: Vec<f64>,
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    f: Vec<f64>,
    i: Vec<f64>,
    o: Vec<f64>,
    g: Vec<f64>,
    tanh_c: Vec<f64>,
}

impl LstmLayer {
    pub fn new(
        input_size: usize,
        hidden_size: usize,
        mode: LstmMode,
        forget_bias: f64,
        rng: &mut RandomSource,
    ) -> Result<LstmLayer> {
        if input_size == 0 || hidden_size == 0 {
            return Err(Error::Config("lstm dimensions must be positive".into()));
        }
        let lim_x = glorot_limit(input_size, hidden_size);
        let lim_h = glorot_limit(hidden_size, hidden_size);
        let mut wx = Vec::with_capacity(4);
        let mut wh = Vec::with_capacity(4);
        let mut b = Vec::with_capacity(4);
        for gate in 0..4 {
            wx.push(rng.uniform(&[hidden_size, input_size], -lim_x, lim_x)?);
            wh.push(rng.uniform(&[hidden_size, hidden_size], -lim_h, lim_h)?);
            let mut bias = Tensor::zeros(&[hidden_size])?;
            if gate == GATE_F && forget_bias != 0.0 {
                bias.fill(forget_bias);
            }
            b.push(bias);
        }
        let to_array = |v: Vec<Tensor>| -> [Tensor; 4] {
            let mut it = v.into_iter();
            [it.next().unwrap(), it.next().unwrap(), it.next().unwrap(), it.next().unwrap()]
        };
        LstmLayer::from_parts(to_array(wx), to_array(wh), to_array(b), mode)
    }

    pub fn from_parts(
        wx: [Tensor; 4],
        wh: [Tensor; 4],
        b: [Tensor; 4],
        mode: LstmMode,
    ) -> Result<LstmLayer> {
        let hidden = wx[0].rows();
        let input = wx[0].cols();
        for gate in 0..4 {
            if wx[gate].shape() != [hidden, input]
                || wh[gate].shape() != [hidden, hidden]
                || b[gate].shape() != [hidden]
            {
                return Err(Error::Shape(format!(
                    "lstm gate {} parts disagree: wx {:?}, wh {:?}, b {:?}",
                    GATE_NAMES[gate],
                    wx[gate].shape(),
                    wh[gate].shape(),
                    b[gate].shape()
                )));
            }
        }
        let zeros_like = |t: &Tensor| Tensor::zeros(t.shape()).expect("valid shape");
        let gwx = [zeros_like(&wx[0]), zeros_like(&wx[1]), zeros_like(&wx[2]), zeros_like(&wx[3])];
        let gwh = [zeros_like(&wh[0]), zeros_like(&wh[1]), zeros_like(&wh[2]), zeros_like(&wh[3])];
        let gb = [zeros_like(&b[0]), zeros_like(&b[1]), zeros_like(&b[2]), zeros_like(&b[3])];
        Ok(LstmLayer {
            input_size: input,
            hidden_size: hidden,
            mode,
            wx,
            wh,
            b,
            gwx,
            gwh,
            gb,
            cache: None,
        })
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden_size
    }

    pub fn mode(&self) -> LstmMode {
        self.mode
    }

    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        if input.len() != 2 || input[1] != self.input_size {
            return Err(Error::Shape(format!(
                "lstm expects input [steps, {}], got {input:?}",
                self.input_size
            )));
        }
        if input[0] == 0 {
            return Err(Error::Shape("lstm needs a nonempty sequence".into()));
        }
        Ok(match self.mode {
            LstmMode::ReturnLast => vec![self.hidden_size],
            LstmMode::ReturnSequence => vec![input[0], self.hidden_size],
        })
    }

    /// Pre-activation of one gate: W x + U h + b.
    fn gate_pre(&self, gate: usize, x: &[f64], h: &[f64]) -> Vec<f64> {
        let hs = self.hidden_size;
        let is = self.input_size;
        let wx = self.wx[gate].data();
        let wh = self.wh[gate].data();
        let b = self.b[gate].data();
        let mut out = vec![0.0; hs];
        for u in 0..hs {
            let mut acc = b[u];
            let xrow = &wx[u * is..(u + 1) * is];
            for (w, xv) in xrow.iter().zip(x) {
                acc += w * xv;
            }
            let hrow = &wh[u * hs..(u + 1) * hs];
            for (w, hv) in hrow.iter().zip(h) {
                acc += w * hv;
            }
            out[u] = acc;
        }
        out
    }

    fn step(&self, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> StepCache {
        let hs = self.hidden_size;
        let mut f = self.gate_pre(GATE_F, x, h_prev);
        let mut i = self.gate_pre(GATE_I, x, h_prev);
        let mut o = self.gate_pre(GATE_O, x, h_prev);
        let mut g = self.gate_pre(GATE_G, x, h_prev);
        for u in 0..hs {
            f[u] = sigmoid(f[u]);
            i[u] = sigmoid(i[u]);
            o[u] = sigmoid(o[u]);
            g[u] = tanh(g[u]);
        }
        // c_t is cheap to recompute from the stored gates, so only tanh(c_t)
        // is cached.
        let mut tanh_c = vec![0.0; hs];
        for u in 0..hs {
            tanh_c[u] = tanh(f[u] * c_prev[u] + i[u] * g[u]);
        }
        StepCache {
            x: x.to_vec(),
            h_prev: h_prev.to_vec(),
            c_prev: c_prev.to_vec(),
            f,
            i,
            o,
            g,
            tanh_c,
        }
    }

    fn cell_from(cache: &StepCache, u: usize) -> f64 {
        cache.f[u] * cache.c_prev[u] + cache.i[u] * cache.g[u]
    }

    fn h_from(cache: &StepCache, u: usize) -> f64 {
        cache.o[u] * cache.tanh_c[u]
    }

    /// One cell step from explicit states; used directly by tests and the
    /// gradient oracle.
    pub fn cell_step(
        &self,
        x: &[f64],
        h_prev: &[f64],
        c_prev: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        if x.len() != self.input_size
            || h_prev.len() != self.hidden_size
            || c_prev.len() != self.hidden_size
        {
            return Err(Error::Shape(format!(
                "lstm cell step expects x[{}], h[{}], c[{}]; got x[{}], h[{}], c[{}]",
                self.input_size,
                self.hidden_size,
                self.hidden_size,
                x.len(),
                h_prev.len(),
                c_prev.len()
            )));
        }
        let cache = self.step(x, h_prev, c_prev);
        let hs = self.hidden_size;
        let mut h = vec![0.0; hs];
        let mut c = vec![0.0; hs];
        for u in 0..hs {
            c[u] = LstmLayer::cell_from(&cache, u);
            h[u] = LstmLayer::h_from(&cache, u);
        }
        Ok((h, c))
    }

    fn run(&self, x: &Tensor) -> Result<(Vec<StepCache>, Tensor)> {
        let out_shape = self.output_shape(x.shape())?;
        let steps = x.shape()[0];
        let hs = self.hidden_size;
        let mut h = vec![0.0; hs];
        let mut c = vec![0.0; hs];
        let mut caches = Vec::with_capacity(steps);
        let mut seq =
            if self.mode == LstmMode::ReturnSequence { Some(vec![0.0; steps * hs]) } else { None };
        for t in 0..steps {
            let cache = self.step(x.row(t), &h, &c);
            for u in 0..hs {
                c[u] = LstmLayer::cell_from(&cache, u);
                h[u] = LstmLayer::h_from(&cache, u);
            }
            if let Some(seq) = seq.as_mut() {
                seq[t * hs..(t + 1) * hs].copy_from_slice(&h);
            }
            caches.push(cache);
        }
        let out = match seq {
            Some(seq) => Tensor::from_vec(&out_shape, seq)?,
            None => Tensor::from_vec(&out_shape, h)?,
        };
        Ok((caches, out))
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        Ok(self.run(x)?.1)
    }

    pub fn forward_train(&mut self, x: &Tensor) -> Result<Tensor> {
        let (caches, out) = self.run(x)?;
        self.cache = Some(caches);
        Ok(out)
    }

    /// BPTT. Accumulates the 12 weight/bias gradients and returns the loss
    /// gradient w.r.t. the input sequence.
    pub fn backward(&mut self, dy: &Tensor) -> Result<Tensor> {
        let caches = self
            .cache
            .take()
            .ok_or_else(|| Error::Config("lstm backward called before forward".into()))?;
        let steps = caches.len();
        let hs = self.hidden_size;
        let is = self.input_size;
        match self.mode {
            LstmMode::ReturnLast => {
                if dy.shape() != [hs] {
                    self.cache = Some(caches);
                    return Err(Error::Shape(format!(
                        "lstm backward expects gradient [{hs}], got {:?}",
                        dy.shape()
                    )));
                }
            }
            LstmMode::ReturnSequence => {
                if dy.shape() != [steps, hs] {
                    self.cache = Some(caches);
                    return Err(Error::Shape(format!(
                        "lstm backward expects gradient [{steps}, {hs}], got {:?}",
                        dy.shape()
                    )));
                }
            }
        }

        let mut dx = vec![0.0; steps * is];
        let mut dh_next = vec![0.0; hs];
        let mut dc_next = vec![0.0; hs];
        // Pre-activation gate gradients for one step, order f,i,o,g.
        let mut dz = [vec![0.0; hs], vec![0.0; hs], vec![0.0; hs], vec![0.0; hs]];

        for t in (0..steps).rev() {
            let cache = &caches[t];
            for u in 0..hs {
                let mut dh = dh_next[u];
                match self.mode {
                    LstmMode::ReturnLast => {
                        if t == steps - 1 {
                            dh += dy.data()[u];
                        }
                    }
                    LstmMode::ReturnSequence => {
                        dh += dy.get2(t, u);
                    }
                }
                let tanh_c = cache.tanh_c[u];
                let dc = dh * cache.o[u] * tanh_prime_from_output(tanh_c) + dc_next[u];

                dz[GATE_O][u] = dh * tanh_c * sigmoid_prime_from_output(cache.o[u]);
                dz[GATE_F][u] = dc * cache.c_prev[u] * sigmoid_prime_from_output(cache.f[u]);
                dz[GATE_I][u] = dc * cache.g[u] * sigmoid_prime_from_output(cache.i[u]);
                dz[GATE_G][u] = dc * cache.i[u] * tanh_prime_from_output(cache.g[u]);

                dc_next[u] = dc * cache.f[u];
            }

            // Parameter gradients and the carries into step t-1.
            let mut dh_prev = vec![0.0; hs];
            let dx_row = &mut dx[t * is..(t + 1) * is];
            for gate in 0..4 {
                let dzg = &dz[gate];
                let wx = self.wx[gate].data();
                let wh = self.wh[gate].data();
                let gwx = self.gwx[gate].data_mut();
                let gwh = self.gwh[gate].data_mut();
                let gb = self.gb[gate].data_mut();
                for u in 0..hs {
                    let d = dzg[u];
                    if d == 0.0 {
                        continue;
                    }
                    gb[u] += d;
                    let xbase = u * is;
                    for k in 0..is {
                        gwx[xbase + k] += d * cache.x[k];
                        dx_row[k] += d * wx[xbase + k];
                    }
                    let hbase = u * hs;
                    for k in 0..hs {
                        gwh[hbase + k] += d * cache.h_prev[k];
                        dh_prev[k] += d * wh[hbase + k];
                    }
                }
            }
            dh_next = dh_prev;
        }

        Tensor::from_vec(&[steps, is], dx)
    }

    pub fn zero_grads(&mut self) {
        for gate in 0..4 {
            self.gwx[gate].fill(0.0);
            self.gwh[gate].fill(0.0);
            self.gb[gate].fill(0.0);
        }
    }

    pub(crate) fn clear_cache(&mut self) {
        self.cache = None;
    }
}
