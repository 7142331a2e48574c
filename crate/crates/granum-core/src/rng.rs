//! Seeded deterministic random source.
//!
//! xoshiro256++ seeded through splitmix64. Pure integer arithmetic, so two
//! sources built from the same seed emit bitwise-identical streams on every
//! platform. Each training run or experiment round owns its own source;
//! nothing here is shared.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Salt xor-ed into a seed to derive an independent stream for shuffling,
/// so weight initialization and batch order never consume the same draws.
pub const SHUFFLE_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    state: [u64; 4],
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RandomSource {
    pub fn new(seed: u64) -> RandomSource {
        let mut s = seed;
        let state =
            [splitmix64(&mut s), splitmix64(&mut s), splitmix64(&mut s), splitmix64(&mut s)];
        RandomSource { seed, state }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Next raw draw (xoshiro256++).
    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.state;
        let result = s[0].wrapping_add(s[3]).rotate_left(23).wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform draw in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, n) via widening multiply (no modulo bias worth
    /// naming at the sizes used here, and fully deterministic).
    pub fn next_below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    /// Tensor of i.i.d. draws in [lo, hi).
    pub fn uniform(&mut self, shape: &[usize], lo: f64, hi: f64) -> Result<Tensor> {
        if !(lo < hi) {
            return Err(Error::Range(format!(
                "uniform bounds must satisfy lo < hi, got [{lo}, {hi})"
            )));
        }
        let mut t = Tensor::zeros(shape)?;
        let span = hi - lo;
        for v in t.data_mut() {
            *v = lo + self.next_f64() * span;
        }
        Ok(t)
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, slice: &mut [T]) {
        for i in (1..slice.len()).rev() {
            let j = self.next_below(i as u64 + 1) as usize;
            slice.swap(i, j);
        }
    }

    /// A convenience vector of uniform draws.
    pub fn uniform_vec(&mut self, n: usize, lo: f64, hi: f64) -> Result<Vec<f64>> {
        Ok(self.uniform(&[n], lo, hi)?.data().to_vec())
    }
}
