//! SLA tracking for service requests.
//!
//! Requests carry a priority; a [`PriorityMatrix`] maps each priority to an
//! allowance in days or hours, counted on the calendar or on working days of
//! a [`WorkCalendar`]. From that the crate derives due dates, day countdowns
//! and breach states, builds the detailed and overview reports, and writes
//! them as CSV. It also computes service-desk KPIs from an event log and
//! simulates priority-only against earliest-deadline-first dispatch.

pub mod calendar;
pub mod csvio;
pub mod error;
pub mod metrics;
pub mod policy;
pub mod priority;
pub mod report;
pub mod request;
pub mod scheduler;
pub mod sla;
pub mod store;
pub mod timestamp;

pub use calendar::WorkCalendar;
pub use error::{Error, Result};
pub use metrics::{DeskEvent, EventKind, MetricsReport};
pub use policy::SlaPolicy;
pub use priority::{CalendarMode, DurationUnit, Priority, PriorityMatrix, SlaDuration};
pub use report::{DetailedRow, OverviewRow, SettingsFile};
pub use request::{IssueId, Request, RequestUpdate, Status};
pub use scheduler::{Comparison, Job, Policy, ScheduleResult};
pub use sla::{BreachState, SlaSnapshot};
pub use store::{RequestFilter, Store, StoreLock};
pub use timestamp::Timestamp;
