//! Daily aggregation, week assembly, and the train/test split.

use std::fmt;

use super::{DailyBar, SeriesDataset, TickRecord, TradingWeek};
use crate::date::Date;
use crate::error::{Error, Result};

/// Collapses sorted ticks into one bar per date: open of the first slot,
/// max high, min low, close of the last slot, summed volume.
pub fn aggregate_daily(ticks: &[TickRecord]) -> Vec<DailyBar> {
    let mut bars: Vec<DailyBar> = Vec::new();
    for t in ticks {
        match bars.last_mut() {
            Some(bar) if bar.date == t.date => {
                bar.high = bar.high.max(t.high);
                bar.low = bar.low.min(t.low);
                bar.close = t.close;
                bar.volume += t.volume;
            }
            _ => bars.push(DailyBar {
                date: t.date,
                open: t.open,
                high: t.high,
                low: t.low,
                close: t.close,
                volume: t.volume,
            }),
        }
    }
    bars
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExclusionReason {
    /// An interior week with fewer than five weekday bars (holidays).
    MissingDays,
    /// An incomplete week at the edge of the data range.
    Partial,
}

impl ExclusionReason {
    fn as_str(self) -> &'static str {
        match self {
            ExclusionReason::MissingDays => "missing-days",
            ExclusionReason::Partial => "partial",
        }
    }
}

/// One dropped week, reported as `EXCLUDED <monday> reason=<...>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exclusion {
    pub week_start: Date,
    pub reason: ExclusionReason,
}

impl fmt::Display for Exclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EXCLUDED {} reason={}", self.week_start, self.reason.as_str())
    }
}

/// Groups date-sorted bars into Monday-anchored weeks. Weeks without all
/// five weekday bars are dropped and reported; weekend bars are ignored.
pub fn build_weeks(bars: &[DailyBar]) -> (Vec<TradingWeek>, Vec<Exclusion>) {
    let mut groups: Vec<(Date, Vec<DailyBar>)> = Vec::new();
    for bar in bars {
        if !bar.date.is_weekday() {
            continue;
        }
        let monday = bar.date.week_monday();
        match groups.last_mut() {
            Some((start, group)) if *start == monday => group.push(*bar),
            _ => groups.push((monday, vec![*bar])),
        }
    }

    let last_idx = groups.len().saturating_sub(1);
    let mut weeks = Vec::new();
    let mut excluded = Vec::new();
    for (idx, (monday, group)) in groups.iter().enumerate() {
        let complete = group.len() == 5
            && group.iter().enumerate().all(|(i, b)| b.date == monday.plus_days(i as i64));
        if complete {
            let bars: [DailyBar; 5] = [group[0], group[1], group[2], group[3], group[4]];
            weeks.push(TradingWeek::new(bars).expect("group verified complete"));
        } else {
            let reason = if idx == 0 || idx == last_idx {
                ExclusionReason::Partial
            } else {
                ExclusionReason::MissingDays
            };
            excluded.push(Exclusion { week_start: *monday, reason });
        }
    }
    (weeks, excluded)
}

/// Renders the exclusion report, one line per dropped week.
pub fn exclusion_report(excluded: &[Exclusion]) -> String {
    let mut out = String::new();
    for e in excluded {
        out.push_str(&e.to_string());
        out.push('\n');
    }
    out
}

/// Splits weeks at `boundary`: weeks ending on or before it train, the rest
/// test. A boundary strictly inside a week (after its Monday, before its
/// Friday) is rejected; a boundary equal to a week's Monday sends that whole
/// week to the test side.
pub fn split(weeks: Vec<TradingWeek>, boundary: Date) -> Result<SeriesDataset> {
    for w in &weeks {
        if w.week_start() < boundary && boundary < w.week_end() {
            return Err(Error::Config(format!(
                "boundary {boundary} splits the trading week of {}",
                w.week_start()
            )));
        }
    }
    for pair in weeks.windows(2) {
        if pair[1].week_start() <= pair[0].week_start() {
            return Err(Error::Data(format!(
                "weeks out of order: {} then {}",
                pair[0].week_start(),
                pair[1].week_start()
            )));
        }
    }
    let train_count = weeks.iter().take_while(|w| w.week_end() <= boundary).count();
    Ok(SeriesDataset { weeks, boundary, train_count })
}
