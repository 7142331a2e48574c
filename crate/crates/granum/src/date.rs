//! Proleptic-Gregorian calendar dates with weekday arithmetic.
//!
//! A single exchange calendar, no time zones. Stored as days since
//! 1970-01-01; conversions use the standard civil-from-days algorithms,
//! so the math is exact over the whole supported range.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Date {
    days: i64,
}

/// Monday = 0 ... Sunday = 6.
pub const MONDAY: u32 = 0;
pub const FRIDAY: u32 = 4;

fn is_leap(y: i64) -> bool {
    (y % 4 == 0 && y % 100 != 0) || y % 400 == 0
}

fn days_in_month(y: i64, m: u32) -> u32 {
    match m {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 => {
            if is_leap(y) {
                29
            } else {
                28
            }
        }
        _ => 0,
    }
}

fn days_from_civil(y: i64, m: u32, d: u32) -> i64 {
    let y = if m <= 2 { y - 1 } else { y };
    let era = if y >= 0 { y } else { y - 399 } / 400;
    let yoe = y - era * 400;
    let mp = if m > 2 { m - 3 } else { m + 9 } as i64;
    let doy = (153 * mp + 2) / 5 + d as i64 - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe - 719_468
}

fn civil_from_days(z: i64) -> (i64, u32, u32) {
    let z = z + 719_468;
    let era = if z >= 0 { z } else { z - 146_096 } / 146_097;
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let m = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    (if m <= 2 { y + 1 } else { y }, m, d)
}

impl Date {
    pub fn from_ymd(year: i64, month: u32, day: u32) -> Result<Date> {
        if !(1..=12).contains(&month) {
            return Err(Error::Data(format!("month {month} out of range")));
        }
        if day == 0 || day > days_in_month(year, month) {
            return Err(Error::Data(format!("day {day} out of range for {year}-{month:02}")));
        }
        Ok(Date { days: days_from_civil(year, month, day) })
    }

    pub fn from_epoch_days(days: i64) -> Date {
        Date { days }
    }

    pub fn epoch_days(self) -> i64 {
        self.days
    }

    pub fn ymd(self) -> (i64, u32, u32) {
        civil_from_days(self.days)
    }

    /// Monday = 0 ... Sunday = 6 (1970-01-01 was a Thursday).
    pub fn weekday(self) -> u32 {
        (self.days + 3).rem_euclid(7) as u32
    }

    pub fn is_weekday(self) -> bool {
        self.weekday() <= FRIDAY
    }

    pub fn plus_days(self, n: i64) -> Date {
        Date { days: self.days + n }
    }

    /// The Monday of this date's calendar week.
    pub fn week_monday(self) -> Date {
        self.plus_days(-(self.weekday() as i64))
    }
}

impl fmt::Display for Date {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (y, m, d) = self.ymd();
        write!(f, "{y:04}-{m:02}-{d:02}")
    }
}

impl FromStr for Date {
    type Err = Error;

    fn from_str(s: &str) -> Result<Date> {
        let parts: Vec<&str> = s.trim().split('-').collect();
        if parts.len() != 3 {
            return Err(Error::Data(format!("bad date `{s}`, expected YYYY-MM-DD")));
        }
        let year: i64 = parts[0].parse().map_err(|_| Error::Data(format!("bad year in `{s}`")))?;
        let month: u32 =
            parts[1].parse().map_err(|_| Error::Data(format!("bad month in `{s}`")))?;
        let day: u32 = parts[2].parse().map_err(|_| Error::Data(format!("bad day in `{s}`")))?;
        Date::from_ymd(year, month, day)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_weekdays() {
        // The dataset anchors: 2012-12-31 was a Monday, 2015-01-09 a Friday.
        assert_eq!("2012-12-31".parse::<Date>().unwrap().weekday(), MONDAY);
        assert_eq!("2015-01-09".parse::<Date>().unwrap().weekday(), FRIDAY);
        assert_eq!("1970-01-01".parse::<Date>().unwrap().weekday(), 3);
    }

    #[test]
    fn round_trip_formatting() {
        for s in ["2013-01-07", "2014-02-28", "2016-02-29", "1999-12-31"] {
            let d: Date = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
        }
    }

    #[test]
    fn rejects_bad_dates() {
        assert!("2013-02-29".parse::<Date>().is_err());
        assert!("2013-13-01".parse::<Date>().is_err());
        assert!("2013-00-01".parse::<Date>().is_err());
        assert!("not-a-date".parse::<Date>().is_err());
    }

    #[test]
    fn week_monday_projection() {
        let wed: Date = "2013-01-09".parse().unwrap();
        assert_eq!(wed.week_monday().to_string(), "2013-01-07");
        let mon: Date = "2013-01-07".parse().unwrap();
        assert_eq!(mon.week_monday(), mon);
    }

    #[test]
    fn arithmetic_crosses_years() {
        let d: Date = "2013-12-31".parse().unwrap();
        assert_eq!(d.plus_days(1).to_string(), "2014-01-01");
        assert_eq!(d.plus_days(-365).to_string(), "2012-12-31");
    }
}
