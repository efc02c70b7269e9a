//! Working-day calendar: weekend mask plus holiday list.

use std::collections::BTreeSet;

use chrono::{Datelike, Days, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ONE_DAY: Days = Days::new(1);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CalendarRepr", into = "CalendarRepr")]
pub struct WorkCalendar {
    /// Bit `n` set means `Weekday::num_days_from_monday() == n` is worked.
    working: u8,
    holidays: BTreeSet<NaiveDate>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CalendarRepr {
    working_weekdays: Vec<Weekday>,
    #[serde(default)]
    holidays: Vec<NaiveDate>,
}

impl TryFrom<CalendarRepr> for WorkCalendar {
    type Error = Error;

    fn try_from(repr: CalendarRepr) -> Result<Self> {
        WorkCalendar::new(repr.working_weekdays, repr.holidays)
    }
}

impl From<WorkCalendar> for CalendarRepr {
    fn from(c: WorkCalendar) -> Self {
        CalendarRepr {
            working_weekdays: c.working_weekdays(),
            holidays: c.holidays.into_iter().collect(),
        }
    }
}

impl Default for WorkCalendar {
    /// Monday to Friday, no holidays.
    fn default() -> Self {
        WorkCalendar {
            working: 0b0001_1111,
            holidays: BTreeSet::new(),
        }
    }
}

impl WorkCalendar {
    pub fn new(
        working_weekdays: impl IntoIterator<Item = Weekday>,
        holidays: impl IntoIterator<Item = NaiveDate>,
    ) -> Result<Self> {
        let working = working_weekdays
            .into_iter()
            .fold(0u8, |mask, wd| mask | 1 << wd.num_days_from_monday());
        if working == 0 {
            return Err(Error::validation("a calendar needs at least one working weekday"));
        }
        let mut set = BTreeSet::new();
        for day in holidays {
            if !set.insert(day) {
                return Err(Error::validation(format!("holiday {day} listed twice")));
            }
        }
        Ok(WorkCalendar {
            working,
            holidays: set,
        })
    }

    pub fn working_weekdays(&self) -> Vec<Weekday> {
        (0..7u8)
            .filter(|n| self.working & (1 << n) != 0)
            .map(|n| Weekday::try_from(n).expect("0..7 is a weekday"))
            .collect()
    }

    pub fn holidays(&self) -> &BTreeSet<NaiveDate> {
        &self.holidays
    }

    pub fn is_working_day(&self, day: NaiveDate) -> bool {
        self.working & (1 << day.weekday().num_days_from_monday()) != 0
            && !self.holidays.contains(&day)
    }

    /// First working day strictly after `day`.
    pub fn next_working_day(&self, day: NaiveDate) -> NaiveDate {
        self.add_working_days(day, 1)
    }

    /// `day` itself when it is worked, else the next working day.
    pub fn roll_forward(&self, day: NaiveDate) -> NaiveDate {
        if self.is_working_day(day) {
            day
        } else {
            self.next_working_day(day)
        }
    }

    /// The `n`-th working day strictly after `day`; `day` itself for `n == 0`.
    ///
    /// Every seven consecutive days contain at least one working weekday, so
    /// the walk terminates unless the holiday list covers every working day
    /// from here to the end of chrono's date range.
    pub fn add_working_days(&self, day: NaiveDate, n: u32) -> NaiveDate {
        let mut remaining = n;
        let mut current = day;
        while remaining > 0 {
            current = current + ONE_DAY;
            if self.is_working_day(current) {
                remaining -= 1;
            }
        }
        current
    }

    /// Working days in the half-open interval `(from, to]`.
    pub fn working_days_between(&self, from: NaiveDate, to: NaiveDate) -> u32 {
        from.iter_days()
            .skip(1)
            .take_while(|d| *d <= to)
            .filter(|d| self.is_working_day(*d))
            .count() as u32
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    #[test]
    fn default_is_monday_to_friday() {
        let cal = WorkCalendar::default();
        assert!(cal.is_working_day(ymd(2014, 5, 2))); // Fri
        assert!(!cal.is_working_day(ymd(2014, 5, 3))); // Sat
        assert!(!cal.is_working_day(ymd(2014, 5, 4))); // Sun
        assert!(cal.is_working_day(ymd(2014, 5, 5))); // Mon
        assert_eq!(cal.working_weekdays().len(), 5);
    }

    #[test]
    fn skips_weekends_and_holidays() {
        let cal = WorkCalendar::new(WorkCalendar::default().working_weekdays(), [ymd(2014, 5, 5)])
            .unwrap();
        assert_eq!(cal.add_working_days(ymd(2014, 5, 2), 1), ymd(2014, 5, 6));
        assert_eq!(cal.add_working_days(ymd(2014, 5, 2), 2), ymd(2014, 5, 7));
        assert_eq!(cal.roll_forward(ymd(2014, 5, 3)), ymd(2014, 5, 6));
        assert_eq!(cal.add_working_days(ymd(2014, 5, 2), 0), ymd(2014, 5, 2));
    }

    #[test]
    fn rejects_empty_week_and_duplicate_holidays() {
        assert!(WorkCalendar::new([], []).is_err());
        let d = ymd(2014, 5, 5);
        assert!(WorkCalendar::new([Weekday::Mon], [d, d]).is_err());
    }

    #[test]
    fn counts_half_open_interval() {
        let cal = WorkCalendar::default();
        assert_eq!(cal.working_days_between(ymd(2014, 5, 4), ymd(2014, 5, 6)), 2);
        assert_eq!(cal.working_days_between(ymd(2014, 5, 2), ymd(2014, 5, 2)), 0);
        assert_eq!(cal.working_days_between(ymd(2014, 5, 2), ymd(2014, 5, 9)), 5);
    }

    #[test]
    fn serde_round_trip() {
        let cal = WorkCalendar::new([Weekday::Sun, Weekday::Mon], [ymd(2014, 5, 5)]).unwrap();
        let json = serde_json::to_string(&cal).unwrap();
        assert!(json.contains("\"Mon\""));
        let back: WorkCalendar = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cal);
        assert!(serde_json::from_str::<WorkCalendar>(r#"{"working_weekdays":[]}"#).is_err());
    }
}
