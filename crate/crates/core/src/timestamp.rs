//! Date or date-time instants and the textual forms accepted on import.
//!
//! Output is always ISO 8601 (`YYYY-MM-DD` or `YYYY-MM-DDTHH:MM`). Input
//! additionally accepts the spreadsheet forms `d-MMM-yy` (`1-May-14`) and
//! `M/d/yyyy` (`5/12/2014`).

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use chrono::{NaiveDate, NaiveDateTime, NaiveTime, Timelike};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// A request instant that may or may not carry a time of day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Timestamp {
    Date(NaiveDate),
    DateTime(NaiveDateTime),
}

impl Timestamp {
    pub fn date(&self) -> NaiveDate {
        match self {
            Timestamp::Date(d) => *d,
            Timestamp::DateTime(dt) => dt.date(),
        }
    }

    /// Date-only values are taken as midnight.
    pub fn to_datetime(&self) -> NaiveDateTime {
        match self {
            Timestamp::Date(d) => d.and_time(NaiveTime::MIN),
            Timestamp::DateTime(dt) => *dt,
        }
    }

    pub fn has_time(&self) -> bool {
        matches!(self, Timestamp::DateTime(_))
    }

    /// Compares two instants at the finest granularity both of them carry:
    /// full date-times when both have a time of day, dates otherwise.
    pub fn cmp_instant(&self, other: &Timestamp) -> Ordering {
        match (self, other) {
            (Timestamp::DateTime(a), Timestamp::DateTime(b)) => a.cmp(b),
            _ => self.date().cmp(&other.date()),
        }
    }
}

impl From<NaiveDate> for Timestamp {
    fn from(d: NaiveDate) -> Self {
        Timestamp::Date(d)
    }
}

impl From<NaiveDateTime> for Timestamp {
    fn from(dt: NaiveDateTime) -> Self {
        Timestamp::DateTime(dt)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Timestamp::Date(d) => write!(f, "{}", d.format("%Y-%m-%d")),
            Timestamp::DateTime(dt) if dt.second() == 0 && dt.nanosecond() == 0 => {
                write!(f, "{}", dt.format("%Y-%m-%dT%H:%M"))
            }
            Timestamp::DateTime(dt) => write!(f, "{}", dt.format("%Y-%m-%dT%H:%M:%S")),
        }
    }
}

const DATETIME_FORMATS: &[&str] = &[
    "%Y-%m-%dT%H:%M",
    "%Y-%m-%dT%H:%M:%S",
    "%Y-%m-%d %H:%M",
    "%Y-%m-%d %H:%M:%S",
];

const DATE_FORMATS: &[&str] = &["%Y-%m-%d", "%d-%b-%y", "%m/%d/%Y"];

impl FromStr for Timestamp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        for fmt in DATETIME_FORMATS {
            if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
                return Ok(Timestamp::DateTime(dt));
            }
        }
        parse_date(s).map(Timestamp::Date)
    }
}

/// Parses a date in any of the accepted textual forms.
pub fn parse_date(s: &str) -> Result<NaiveDate, Error> {
    let s = s.trim();
    DATE_FORMATS
        .iter()
        .find_map(|fmt| NaiveDate::parse_from_str(s, fmt).ok())
        .ok_or_else(|| Error::Parse(format!("unrecognised date '{s}'")))
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    #[test]
    fn accepts_all_three_date_forms() {
        assert_eq!("2014-05-07".parse::<Timestamp>().unwrap(), ymd(2014, 5, 7).into());
        assert_eq!("7-May-14".parse::<Timestamp>().unwrap(), ymd(2014, 5, 7).into());
        assert_eq!("1-May-14".parse::<Timestamp>().unwrap(), ymd(2014, 5, 1).into());
        assert_eq!("5/12/2014".parse::<Timestamp>().unwrap(), ymd(2014, 5, 12).into());
        assert_eq!("10/05/2014".parse::<Timestamp>().unwrap(), ymd(2014, 10, 5).into());
    }

    #[test]
    fn date_time_round_trips_through_display() {
        let ts: Timestamp = "2014-05-02T09:30".parse().unwrap();
        assert!(ts.has_time());
        assert_eq!(ts.to_string(), "2014-05-02T09:30");
        let with_secs: Timestamp = "2014-05-02 09:30:15".parse().unwrap();
        assert_eq!(with_secs.to_string(), "2014-05-02T09:30:15");
        assert_eq!(with_secs.to_string().parse::<Timestamp>().unwrap(), with_secs);
    }

    #[test]
    fn rejects_garbage() {
        assert!("yesterday".parse::<Timestamp>().is_err());
        assert!("2014-13-01".parse::<Timestamp>().is_err());
        assert!("".parse::<Timestamp>().is_err());
    }

    #[test]
    fn mixed_granularity_compares_on_date() {
        let d: Timestamp = ymd(2014, 5, 7).into();
        let dt: Timestamp = "2014-05-07T15:00".parse().unwrap();
        assert_eq!(d.cmp_instant(&dt), Ordering::Equal);
        let earlier: Timestamp = "2014-05-07T09:00".parse().unwrap();
        assert_eq!(earlier.cmp_instant(&dt), Ordering::Less);
    }
}
