use std::fmt;

use chrono::{Datelike, Days, NaiveDate, Weekday};

use crate::error::{Error, Result};

/// A trading day. ISO-8601 on the wire, a day number internally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Day(i32);

impl Day {
    pub fn from_date(date: NaiveDate) -> Self {
        Day(date.num_days_from_ce())
    }

    pub fn from_ymd(year: i32, month: u32, day: u32) -> Option<Self> {
        NaiveDate::from_ymd_opt(year, month, day).map(Self::from_date)
    }

    pub fn parse(s: &str) -> Result<Self> {
        NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d")
            .map(Self::from_date)
            .map_err(|e| Error::Malformed(format!("bad date `{s}`: {e}")))
    }

    pub fn date(self) -> NaiveDate {
        NaiveDate::from_num_days_from_ce_opt(self.0).expect("day number within chrono range")
    }

    pub fn number(self) -> i32 {
        self.0
    }
}

impl fmt::Display for Day {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.date().format("%Y-%m-%d"))
    }
}

/// `count` consecutive weekdays starting at `start` (rolled forward if it is a weekend).
pub fn weekday_calendar(start: NaiveDate, count: usize) -> Vec<Day> {
    let mut out = Vec::with_capacity(count);
    let mut d = start;
    while out.len() < count {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(Day::from_date(d));
        }
        d = d + Days::new(1);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iso_round_trip() {
        let d = Day::parse("2015-03-09").unwrap();
        assert_eq!(d.to_string(), "2015-03-09");
        assert!(Day::parse("2015-13-01").is_err());
    }

    #[test]
    fn weekdays_skip_weekends() {
        let start = NaiveDate::from_ymd_opt(2010, 1, 1).unwrap(); // a Friday
        let cal = weekday_calendar(start, 3);
        let s: Vec<String> = cal.iter().map(|d| d.to_string()).collect();
        assert_eq!(s, ["2010-01-01", "2010-01-04", "2010-01-05"]);
    }
}
