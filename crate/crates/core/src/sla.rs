//! Due dates, countdowns and breach classification.

use std::cmp::Ordering;

use chrono::{Days, NaiveDate, NaiveTime, TimeDelta};
use serde::{Deserialize, Serialize};

use crate::calendar::WorkCalendar;
use crate::error::Result;
use crate::priority::{CalendarMode, DurationUnit, Priority, PriorityMatrix};
use crate::request::{Request, Status};
use crate::timestamp::Timestamp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BreachState {
    OnTrack,
    DueToday,
    Breached,
    CompletedOnTime,
    CompletedLate,
    Exempt,
}

impl BreachState {
    /// Counted under "SLA Missed?".
    pub fn is_missed(&self) -> bool {
        matches!(self, BreachState::Breached | BreachState::CompletedLate)
    }
}

/// Due instant for a request created at `creation`, or `None` for Planned.
///
/// Day allowances keep the creation time of day. In business-day mode a day
/// allowance of `n` lands on the `n`-th working day strictly after the
/// creation date. Hour allowances add wall-clock hours; in business-day mode
/// the clock starts at the next working midnight when created off-calendar,
/// and a result on a non-working day rolls forward to the next working day.
pub fn compute_due_date(
    creation: Timestamp,
    priority: Priority,
    matrix: &PriorityMatrix,
    calendar: &WorkCalendar,
) -> Result<Option<Timestamp>> {
    let Some(allowance) = matrix.duration_for(priority)? else {
        return Ok(None);
    };
    let n = allowance.amount;
    let due = match (allowance.unit, matrix.calendar_mode()) {
        (DurationUnit::Days, CalendarMode::CalendarDays) => shift_date(creation, |d| {
            d.checked_add_days(Days::new(n.into())).expect("date in range")
        }),
        (DurationUnit::Days, CalendarMode::BusinessDays) => {
            shift_date(creation, |d| calendar.add_working_days(d, n))
        }
        (DurationUnit::Hours, CalendarMode::CalendarDays) => {
            Timestamp::DateTime(creation.to_datetime() + TimeDelta::hours(n.into()))
        }
        (DurationUnit::Hours, CalendarMode::BusinessDays) => {
            let mut start = creation.to_datetime();
            if !calendar.is_working_day(start.date()) {
                start = calendar.next_working_day(start.date()).and_time(NaiveTime::MIN);
            }
            let end = start + TimeDelta::hours(n.into());
            let day = calendar.roll_forward(end.date());
            Timestamp::DateTime(day.and_time(end.time()))
        }
    };
    Ok(Some(due))
}

fn shift_date(ts: Timestamp, f: impl FnOnce(NaiveDate) -> NaiveDate) -> Timestamp {
    match ts {
        Timestamp::Date(d) => Timestamp::Date(f(d)),
        Timestamp::DateTime(dt) => Timestamp::DateTime(f(dt.date()).and_time(dt.time())),
    }
}

/// Whole days from `as_of` until `due`; negative once past due.
pub fn due_in(due: NaiveDate, as_of: NaiveDate) -> i64 {
    (due - as_of).num_days()
}

/// Due date, countdown and breach state of one request as of a date.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlaSnapshot {
    pub due: Option<Timestamp>,
    pub due_in_days: Option<i64>,
    pub breach: BreachState,
}

pub fn evaluate(
    request: &Request,
    matrix: &PriorityMatrix,
    calendar: &WorkCalendar,
    as_of: NaiveDate,
) -> Result<SlaSnapshot> {
    let due = compute_due_date(request.creation, request.priority, matrix, calendar)?;
    let due_in_days = due.map(|d| due_in(d.date(), as_of));
    let breach = classify(request.status, request.completion, due, as_of);
    Ok(SlaSnapshot {
        due,
        due_in_days,
        breach,
    })
}

pub fn breach_state(
    request: &Request,
    matrix: &PriorityMatrix,
    calendar: &WorkCalendar,
    as_of: NaiveDate,
) -> Result<BreachState> {
    evaluate(request, matrix, calendar, as_of).map(|s| s.breach)
}

/// Breach rule shared by live evaluation and by re-reading emitted reports.
///
/// The due date itself is not a breach. Completion is compared at the finest
/// granularity that both instants carry.
pub fn classify(
    status: Status,
    completion: Option<Timestamp>,
    due: Option<Timestamp>,
    as_of: NaiveDate,
) -> BreachState {
    let Some(due) = due else {
        return BreachState::Exempt;
    };
    if status == Status::Completed {
        return match completion {
            Some(done) if done.cmp_instant(&due) == Ordering::Greater => {
                BreachState::CompletedLate
            }
            _ => BreachState::CompletedOnTime,
        };
    }
    match as_of.cmp(&due.date()) {
        Ordering::Less => BreachState::OnTrack,
        Ordering::Equal => BreachState::DueToday,
        Ordering::Greater => BreachState::Breached,
    }
}
