use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A calendar month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::Domain(format!("month must be 1..12, got {month}")));
        }
        Ok(Self { year, month })
    }

    pub fn of(t: &NaiveDateTime) -> Self {
        Self {
            year: t.year(),
            month: t.month(),
        }
    }

    fn ordinal(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    pub fn plus_months(self, k: i64) -> Self {
        let o = self.ordinal() + k;
        Self {
            year: o.div_euclid(12) as i32,
            month: (o.rem_euclid(12) + 1) as u32,
        }
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = Error;

    /// Accepts `YYYY-MM` or `YYYY-MM-DD` (the day is ignored).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("expected YYYY-MM, got `{s}`"));
        let mut parts = s.trim().splitn(3, '-');
        let year = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
        let month = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
        YearMonth::new(year, month)
    }
}

/// Inclusive range of months.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StudyWindow {
    pub start: YearMonth,
    pub end: YearMonth,
}

impl Default for StudyWindow {
    fn default() -> Self {
        Self {
            start: YearMonth {
                year: 2013,
                month: 12,
            },
            end: YearMonth {
                year: 2016,
                month: 3,
            },
        }
    }
}

impl StudyWindow {
    pub fn new(start: YearMonth, end: YearMonth) -> Result<Self> {
        if end < start {
            return Err(Error::Domain(format!(
                "window end {end} precedes start {start}"
            )));
        }
        Ok(Self { start, end })
    }

    pub fn n_months(&self) -> usize {
        (self.end.ordinal() - self.start.ordinal() + 1) as usize
    }

    /// Zero-based month offset within the window.
    pub fn index_of(&self, ym: YearMonth) -> Option<usize> {
        let d = ym.ordinal() - self.start.ordinal();
        (d >= 0 && (d as usize) < self.n_months()).then_some(d as usize)
    }

    pub fn contains(&self, ym: YearMonth) -> bool {
        self.index_of(ym).is_some()
    }

    pub fn months(&self) -> impl Iterator<Item = YearMonth> + '_ {
        (0..self.n_months() as i64).map(|k| self.start.plus_months(k))
    }

    /// Number of periods, erroring unless `period_months` divides the window.
    pub fn periods(&self, period_months: usize) -> Result<usize> {
        let n = self.n_months();
        if period_months == 0 || !n.is_multiple_of(period_months) {
            return Err(Error::Domain(format!(
                "a {n}-month window does not split into {period_months}-month periods; \
                 adjust --period-months or the study window"
            )));
        }
        Ok(n / period_months)
    }
}
