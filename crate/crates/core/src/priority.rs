//! Priority levels and the priority-to-duration mapping sheet.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Priority {
    Critical,
    High,
    Medium,
    Low,
    /// Long-running approval work; never on an SLA clock.
    Planned,
}

impl Priority {
    pub const ALL: [Priority; 5] = [
        Priority::Critical,
        Priority::High,
        Priority::Medium,
        Priority::Low,
        Priority::Planned,
    ];

    /// The four levels that carry an SLA, in report order.
    pub const TRACKED: [Priority; 4] = [
        Priority::Critical,
        Priority::High,
        Priority::Medium,
        Priority::Low,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Priority::Critical => "Critical",
            Priority::High => "High",
            Priority::Medium => "Medium",
            Priority::Low => "Low",
            Priority::Planned => "Planned",
        }
    }

    pub fn is_exempt(&self) -> bool {
        matches!(self, Priority::Planned)
    }
}

impl fmt::Display for Priority {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Priority {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let token = s.trim();
        Priority::ALL
            .into_iter()
            .find(|p| p.as_str().eq_ignore_ascii_case(token))
            .ok_or_else(|| Error::Parse(format!("unknown priority '{token}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DurationUnit {
    Days,
    Hours,
}

/// A positive SLA allowance such as "3 days" or "4 hours".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SlaDuration {
    pub amount: u32,
    pub unit: DurationUnit,
}

impl SlaDuration {
    pub const fn days(amount: u32) -> Self {
        SlaDuration {
            amount,
            unit: DurationUnit::Days,
        }
    }

    pub const fn hours(amount: u32) -> Self {
        SlaDuration {
            amount,
            unit: DurationUnit::Hours,
        }
    }
}

impl fmt::Display for SlaDuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.unit {
            DurationUnit::Days => write!(f, "{}d", self.amount),
            DurationUnit::Hours => write!(f, "{}h", self.amount),
        }
    }
}

impl FromStr for SlaDuration {
    type Err = Error;

    /// Accepts `3d`, `4h`, `1 day`, `3 days`, `4 hours`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let split = s
            .find(|c: char| !c.is_ascii_digit())
            .ok_or_else(|| Error::Parse(format!("duration '{s}' has no unit")))?;
        let (num, unit) = s.split_at(split);
        let amount: u32 = num
            .parse()
            .map_err(|_| Error::Parse(format!("bad duration amount in '{s}'")))?;
        let unit = match unit.trim() {
            "d" | "day" | "days" => DurationUnit::Days,
            "h" | "hour" | "hours" => DurationUnit::Hours,
            other => return Err(Error::Parse(format!("unknown duration unit '{other}'"))),
        };
        Ok(SlaDuration { amount, unit })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum CalendarMode {
    #[default]
    CalendarDays,
    BusinessDays,
}

impl FromStr for CalendarMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_', ' '], "").as_str() {
            "calendar" | "calendardays" => Ok(CalendarMode::CalendarDays),
            "business" | "businessdays" | "working" | "workingdays" => {
                Ok(CalendarMode::BusinessDays)
            }
            other => Err(Error::Parse(format!("unknown calendar mode '{other}'"))),
        }
    }
}

/// Mapping from each SLA-bearing priority to its allowance.
///
/// Always holds exactly Critical, High, Medium and Low with positive amounts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct PriorityMatrix {
    entries: BTreeMap<Priority, SlaDuration>,
    calendar_mode: CalendarMode,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixRepr {
    entries: BTreeMap<Priority, SlaDuration>,
    #[serde(default)]
    calendar_mode: CalendarMode,
}

impl TryFrom<MatrixRepr> for PriorityMatrix {
    type Error = Error;

    fn try_from(repr: MatrixRepr) -> Result<Self> {
        PriorityMatrix::new(repr.entries, repr.calendar_mode)
    }
}

impl From<PriorityMatrix> for MatrixRepr {
    fn from(m: PriorityMatrix) -> Self {
        MatrixRepr {
            entries: m.entries,
            calendar_mode: m.calendar_mode,
        }
    }
}

impl PriorityMatrix {
    pub fn new(
        entries: BTreeMap<Priority, SlaDuration>,
        calendar_mode: CalendarMode,
    ) -> Result<Self> {
        if entries.contains_key(&Priority::Planned) {
            return Err(Error::validation("Planned is SLA-exempt and takes no entry"));
        }
        let missing: Vec<&str> = Priority::TRACKED
            .iter()
            .filter(|p| !entries.contains_key(p))
            .map(Priority::as_str)
            .collect();
        if !missing.is_empty() {
            return Err(Error::validation(format!(
                "matrix is missing {}",
                missing.join(", ")
            )));
        }
        if let Some((p, _)) = entries.iter().find(|(_, d)| d.amount == 0) {
            return Err(Error::validation(format!("duration for {p} must be positive")));
        }
        Ok(PriorityMatrix {
            entries,
            calendar_mode,
        })
    }

    /// Critical 1, High 2, Medium 3, Low 5 days, counted on the calendar.
    pub fn standard() -> Self {
        Self::from_array(
            [
                SlaDuration::days(1),
                SlaDuration::days(2),
                SlaDuration::days(3),
                SlaDuration::days(5),
            ],
            CalendarMode::CalendarDays,
        )
    }

    /// Critical 1 hour, High 4 hours, Medium 1 day, Low 3 days.
    pub fn hourly() -> Self {
        Self::from_array(
            [
                SlaDuration::hours(1),
                SlaDuration::hours(4),
                SlaDuration::days(1),
                SlaDuration::days(3),
            ],
            CalendarMode::CalendarDays,
        )
    }

    fn from_array(durations: [SlaDuration; 4], calendar_mode: CalendarMode) -> Self {
        let entries = Priority::TRACKED.into_iter().zip(durations).collect();
        PriorityMatrix::new(entries, calendar_mode).expect("built-in matrix is valid")
    }

    pub fn calendar_mode(&self) -> CalendarMode {
        self.calendar_mode
    }

    pub fn with_calendar_mode(mut self, mode: CalendarMode) -> Self {
        self.calendar_mode = mode;
        self
    }

    /// Replaces one entry, re-checking positivity.
    pub fn with_entry(mut self, priority: Priority, duration: SlaDuration) -> Result<Self> {
        self.entries.insert(priority, duration);
        PriorityMatrix::new(self.entries, self.calendar_mode)
    }

    pub fn entries(&self) -> &BTreeMap<Priority, SlaDuration> {
        &self.entries
    }

    /// `None` for Planned.
    pub fn duration_for(&self, priority: Priority) -> Result<Option<SlaDuration>> {
        if priority.is_exempt() {
            return Ok(None);
        }
        self.entries
            .get(&priority)
            .copied()
            .map(Some)
            .ok_or_else(|| Error::Config(format!("no matrix entry for {priority}")))
    }

    #[cfg(test)]
    pub(crate) fn unchecked(
        entries: BTreeMap<Priority, SlaDuration>,
        calendar_mode: CalendarMode,
    ) -> Self {
        PriorityMatrix {
            entries,
            calendar_mode,
        }
    }
}

impl Default for PriorityMatrix {
    fn default() -> Self {
        Self::standard()
    }
}
