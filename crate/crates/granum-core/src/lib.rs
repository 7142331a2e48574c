//! Numeric core for the granum forecasting engine.
//!
//! Everything in this crate is deterministic, allocation-only math: shaped
//! f64 tensors, a seeded PRNG, layers with hand-derived backward passes, an
//! Adam optimizer, a finite-difference gradient checker, and builders for the
//! seven CNN/LSTM weekly forecast architectures. There is no IO here — the
//! weight persistence format is encoded to/from strings, and the companion
//! `granum` crate owns files, dates, and the CLI.
//!
//! The crate is `no_std` (with `alloc`); all transcendental functions come
//! from `libm` so results do not depend on the platform libm.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod activations;
pub mod adam;
pub mod conv;
pub mod dense;
pub mod error;
pub mod gradcheck;
pub mod layer;
pub mod loss;
pub mod lstm;
mod math;
pub mod models;
pub mod network;
pub mod pool;
pub mod reshape;
pub mod rng;
pub mod tensor;
pub mod weights;

pub use error::{Error, Result};
pub use layer::Layer;
pub use models::{BuildConfig, ModelId, ModelSpec, TrainConfig, TrainLog, TrainSample};
pub use network::Network;
pub use rng::RandomSource;
pub use tensor::Tensor;
