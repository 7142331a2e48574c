//! CSV ingestion and emission.
//!
//! Tick CSV header: `date,time,open,high,low,close,volume` with ISO dates
//! and 24h HH:MM times. Daily-bar CSV drops the `time` column. Errors carry
//! 1-based line numbers.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use super::{check_ohlc, DailyBar, TickRecord};
use crate::date::Date;
use crate::error::{Error, Result};

const TICK_HEADER: &str = "date,time,open,high,low,close,volume";
const DAILY_HEADER: &str = "date,open,high,low,close,volume";

fn parse_price(field: &str, name: &str, line: usize) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse { line, msg: format!("bad {name} value `{field}`") })
}

fn parse_volume(field: &str, line: usize) -> Result<u64> {
    field
        .trim()
        .parse::<u64>()
        .map_err(|_| Error::Parse { line, msg: format!("bad volume value `{field}`") })
}

fn parse_time(field: &str, line: usize) -> Result<u32> {
    let (h, m) = field
        .trim()
        .split_once(':')
        .ok_or_else(|| Error::Parse { line, msg: format!("bad time `{field}`, expected HH:MM") })?;
    let hours: u32 =
        h.parse().map_err(|_| Error::Parse { line, msg: format!("bad hour in `{field}`") })?;
    let minutes: u32 =
        m.parse().map_err(|_| Error::Parse { line, msg: format!("bad minute in `{field}`") })?;
    if hours > 23 || minutes > 59 {
        return Err(Error::Parse { line, msg: format!("time `{field}` out of range") });
    }
    Ok(hours * 60 + minutes)
}

/// Parses and validates tick records, returning them sorted by (date, time).
/// Duplicate (date, time) keys and OHLC ordering violations are rejected.
pub fn parse_ticks(text: &str) -> Result<Vec<TickRecord>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::Data("tick file is empty".into()))?;
    if header.trim() != TICK_HEADER {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected header `{TICK_HEADER}`, got `{}`", header.trim()),
        });
    }

    let mut records = Vec::new();
    let mut seen: HashSet<(i64, u32)> = HashSet::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 7 fields, got {}", fields.len()),
            });
        }
        let date: Date =
            fields[0].trim().parse().map_err(|e| Error::Parse { line, msg: format!("{e}") })?;
        let minutes = parse_time(fields[1], line)?;
        let open = parse_price(fields[2], "open", line)?;
        let high = parse_price(fields[3], "high", line)?;
        let low = parse_price(fields[4], "low", line)?;
        let close = parse_price(fields[5], "close", line)?;
        let volume = parse_volume(fields[6], line)?;
        check_ohlc(open, high, low, close).map_err(|msg| Error::Validation { line, msg })?;
        if !seen.insert((date.epoch_days(), minutes)) {
            return Err(Error::Validation {
                line,
                msg: format!("duplicate record for {date} at slot {}", fields[1].trim()),
            });
        }
        records.push(TickRecord { date, minutes, open, high, low, close, volume });
    }
    if records.is_empty() {
        return Err(Error::Data("tick file has a header but no records".into()));
    }
    records.sort_by_key(|r| (r.date, r.minutes));
    Ok(records)
}

/// Reads a daily-bar CSV (`date,open,high,low,close,volume`), sorted and
/// validated the same way.
pub fn read_daily_csv(text: &str) -> Result<Vec<DailyBar>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::Data("daily bar file is empty".into()))?;
    if header.trim() != DAILY_HEADER {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected header `{DAILY_HEADER}`, got `{}`", header.trim()),
        });
    }
    let mut bars = Vec::new();
    let mut seen: HashSet<i64> = HashSet::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 6 fields, got {}", fields.len()),
            });
        }
        let date: Date =
            fields[0].trim().parse().map_err(|e| Error::Parse { line, msg: format!("{e}") })?;
        let open = parse_price(fields[1], "open", line)?;
        let high = parse_price(fields[2], "high", line)?;
        let low = parse_price(fields[3], "low", line)?;
        let close = parse_price(fields[4], "close", line)?;
        let volume = parse_volume(fields[5], line)?;
        check_ohlc(open, high, low, close).map_err(|msg| Error::Validation { line, msg })?;
        if !seen.insert(date.epoch_days()) {
            return Err(Error::Validation { line, msg: format!("duplicate daily bar for {date}") });
        }
        bars.push(DailyBar { date, open, high, low, close, volume });
    }
    if bars.is_empty() {
        return Err(Error::Data("daily bar file has a header but no records".into()));
    }
    bars.sort_by_key(|b| b.date);
    Ok(bars)
}

/// Serializes daily bars in the daily CSV schema. Floats use the shortest
/// representation that parses back to the same value.
pub fn write_daily_csv(bars: &[DailyBar]) -> String {
    let mut out = String::from(DAILY_HEADER);
    out.push('\n');
    for b in bars {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            b.date, b.open, b.high, b.low, b.close, b.volume
        ));
    }
    out
}

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_string(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    fs::write(path, content).map_err(|e| Error::io(path, e))
}
