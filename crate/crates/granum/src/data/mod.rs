//! OHLCV ingestion: 5-minute ticks to daily bars to Monday-Friday trading
//! weeks, train/test splitting, and supervised window extraction.

pub mod csv;
mod samples;
pub mod scale;
pub mod synth;
pub mod weeks;

pub use csv::{parse_ticks, read_daily_csv, write_daily_csv};
pub use samples::{make_training_samples, window_tensor, WindowSample};
pub use weeks::{aggregate_daily, build_weeks, split, Exclusion, ExclusionReason};

use crate::date::Date;
use crate::error::{Error, Result};

/// One 5-minute OHLCV record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TickRecord {
    pub date: Date,
    /// Minutes since midnight of the slot start.
    pub minutes: u32,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: u64,
}

/// A single trading day aggregated from its ticks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DailyBar {
    pub date: Date,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: u64,
}

pub(crate) fn check_ohlc(
    open: f64,
    high: f64,
    low: f64,
    close: f64,
) -> std::result::Result<(), String> {
    for (name, v) in [("open", open), ("high", high), ("low", low), ("close", close)] {
        if !v.is_finite() {
            return Err(format!("{name} is not finite"));
        }
    }
    let body_lo = open.min(close);
    let body_hi = open.max(close);
    if !(low <= body_lo && body_hi <= high) {
        return Err(format!(
            "OHLC ordering violated: low {low}, open {open}, close {close}, high {high}"
        ));
    }
    Ok(())
}

/// Exactly five consecutive weekday bars, Monday through Friday.
#[derive(Debug, Clone, PartialEq)]
pub struct TradingWeek {
    week_start: Date,
    bars: [DailyBar; 5],
}

impl TradingWeek {
    pub fn new(bars: [DailyBar; 5]) -> Result<TradingWeek> {
        let monday = bars[0].date;
        if monday.weekday() != crate::date::MONDAY {
            return Err(Error::Data(format!("week must start on a Monday, got {monday}")));
        }
        for (i, bar) in bars.iter().enumerate() {
            if bar.date != monday.plus_days(i as i64) {
                return Err(Error::Data(format!(
                    "week of {monday}: bar {i} has date {}, expected {}",
                    bar.date,
                    monday.plus_days(i as i64)
                )));
            }
        }
        Ok(TradingWeek { week_start: monday, bars })
    }

    pub fn week_start(&self) -> Date {
        self.week_start
    }

    /// Friday's date.
    pub fn week_end(&self) -> Date {
        self.week_start.plus_days(4)
    }

    pub fn bars(&self) -> &[DailyBar; 5] {
        &self.bars
    }

    pub fn opens(&self) -> [f64; 5] {
        [
            self.bars[0].open,
            self.bars[1].open,
            self.bars[2].open,
            self.bars[3].open,
            self.bars[4].open,
        ]
    }
}

/// Input features per day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureSet {
    /// Open only.
    Univariate,
    /// Open, high, low, close, volume.
    Multivariate,
}

impl FeatureSet {
    pub fn width(self) -> usize {
        match self {
            FeatureSet::Univariate => 1,
            FeatureSet::Multivariate => 5,
        }
    }

    pub fn extract(self, bar: &DailyBar) -> Vec<f64> {
        match self {
            FeatureSet::Univariate => vec![bar.open],
            FeatureSet::Multivariate => {
                vec![bar.open, bar.high, bar.low, bar.close, bar.volume as f64]
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureSet::Univariate => "univariate",
            FeatureSet::Multivariate => "multivariate",
        }
    }
}

/// Ordered complete trading weeks split into a train and a test range.
#[derive(Debug, Clone)]
pub struct SeriesDataset {
    weeks: Vec<TradingWeek>,
    boundary: Date,
    train_count: usize,
}

impl SeriesDataset {
    pub fn weeks(&self) -> &[TradingWeek] {
        &self.weeks
    }

    pub fn boundary(&self) -> Date {
        self.boundary
    }

    pub fn train_weeks(&self) -> &[TradingWeek] {
        &self.weeks[..self.train_count]
    }

    pub fn test_weeks(&self) -> &[TradingWeek] {
        &self.weeks[self.train_count..]
    }

    /// All daily bars of the training range in date order.
    pub fn train_bars(&self) -> Vec<DailyBar> {
        self.train_weeks().iter().flat_map(|w| w.bars().iter().copied()).collect()
    }
}
