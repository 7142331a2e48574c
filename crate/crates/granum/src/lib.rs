//! Weekly stock-price forecasting harness.
//!
//! Everything numeric lives in `granum-core`; this crate owns the world
//! around it: OHLCV CSV ingestion and daily aggregation, trading-week
//! assembly, the walk-forward evaluation protocol, the seeded multi-round
//! experiment runner with its CSV/text reports, and the `granum` CLI.

pub mod cli;
pub mod config;
pub mod data;
pub mod date;
pub mod error;
pub mod experiment;
pub mod gradcheck;
pub mod persist;
pub mod report;
pub mod walkforward;

pub use error::{Error, Result};
