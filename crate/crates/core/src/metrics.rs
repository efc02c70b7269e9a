//! Service-desk performance metrics over an event log.
//!
//! Ratios with an empty denominator are reported as `None`, never as 0 or
//! 100, so "no data" stays distinguishable from a perfect score.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use chrono::{NaiveDateTime, TimeDelta};
use serde::{Deserialize, Serialize};

use crate::csvio;
use crate::error::{Error, Result};
use crate::request::{Request, Status};
use crate::timestamp::Timestamp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    CallOffered,
    CallAnswered,
    CallAbandoned,
    CaseResolved,
    CallbackOccurred,
    OutageStart,
    OutageEnd,
}

impl EventKind {
    pub const ALL: [EventKind; 7] = [
        EventKind::CallOffered,
        EventKind::CallAnswered,
        EventKind::CallAbandoned,
        EventKind::CaseResolved,
        EventKind::CallbackOccurred,
        EventKind::OutageStart,
        EventKind::OutageEnd,
    ];
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for EventKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        EventKind::ALL
            .into_iter()
            .find(|k| k.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse(format!("unknown event kind '{}'", s.trim())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeskEvent {
    pub kind: EventKind,
    pub at: NaiveDateTime,
    #[serde(default)]
    pub case_id: Option<String>,
    #[serde(default)]
    pub answer_delay_s: Option<f64>,
}

impl DeskEvent {
    pub fn new(kind: EventKind, at: NaiveDateTime) -> Self {
        DeskEvent {
            kind,
            at,
            case_id: None,
            answer_delay_s: None,
        }
    }

    pub fn answered(at: NaiveDateTime, delay_s: f64) -> Self {
        DeskEvent {
            answer_delay_s: Some(delay_s),
            ..DeskEvent::new(EventKind::CallAnswered, at)
        }
    }

    pub fn for_case(kind: EventKind, at: NaiveDateTime, case_id: impl Into<String>) -> Self {
        DeskEvent {
            case_id: Some(case_id.into()),
            ..DeskEvent::new(kind, at)
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.kind, self.answer_delay_s) {
            (EventKind::CallAnswered, None) => {
                return Err(Error::validation("CallAnswered needs answer_delay_s"))
            }
            (EventKind::CallAnswered, Some(d)) if !(d.is_finite() && d >= 0.0) => {
                return Err(Error::validation(format!(
                    "answer_delay_s must be a non-negative number, got {d}"
                )))
            }
            (EventKind::CallAnswered, Some(_)) => {}
            (kind, Some(_)) => {
                return Err(Error::validation(format!("{kind} carries no answer_delay_s")))
            }
            (_, None) => {}
        }
        if matches!(self.kind, EventKind::CaseResolved | EventKind::CallbackOccurred)
            && self.case_id.as_deref().is_none_or(|c| c.trim().is_empty())
        {
            return Err(Error::validation(format!("{} needs a case_id", self.kind)));
        }
        Ok(())
    }
}

pub const EVENT_HEADER: [&str; 4] = ["kind", "at", "case_id", "answer_delay_s"];

/// Reads an event log with header `kind,at,case_id,answer_delay_s`.
pub fn parse_events_csv(bytes: &[u8]) -> Result<Vec<DeskEvent>> {
    let mut rdr = csvio::reader(bytes);
    let headers = rdr.headers().map_err(csvio::csv_err)?.clone();
    let cols = csvio::Columns::locate(&headers, &EVENT_HEADER)?;
    let mut events = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(csvio::csv_err)?;
        let row = |e: Error| Error::Parse(format!("event row {}: {e}", i + 1));
        let kind = cols
            .get(&record, "kind")
            .ok_or_else(|| Error::validation("kind is empty"))
            .and_then(str::parse)
            .map_err(row)?;
        let at = cols
            .get(&record, "at")
            .ok_or_else(|| Error::validation("at is empty"))
            .and_then(str::parse::<Timestamp>)
            .map_err(row)?
            .to_datetime();
        let answer_delay_s = cols
            .get(&record, "answer_delay_s")
            .map(|v| v.trim().parse::<f64>())
            .transpose()
            .map_err(|e| row(Error::Parse(format!("bad answer_delay_s: {e}"))))?;
        let event = DeskEvent {
            kind,
            at,
            case_id: cols.get(&record, "case_id").map(|c| c.trim().to_string()),
            answer_delay_s,
        };
        event.validate().map_err(row)?;
        events.push(event);
    }
    Ok(events)
}

pub fn events_csv(events: &[DeskEvent]) -> Vec<u8> {
    let mut buf = Vec::new();
    {
        let mut w = csvio::writer(&mut buf);
        w.write_record(EVENT_HEADER).expect("write to Vec");
        for e in events {
            w.write_record([
                e.kind.to_string(),
                Timestamp::DateTime(e.at).to_string(),
                e.case_id.clone().unwrap_or_default(),
                e.answer_delay_s.map(|d| d.to_string()).unwrap_or_default(),
            ])
            .expect("write to Vec");
        }
        w.flush().expect("flush Vec");
    }
    buf
}

fn count(events: &[DeskEvent], kind: EventKind) -> usize {
    events.iter().filter(|e| e.kind == kind).count()
}

fn pct(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 * 100.0 / den as f64)
}

fn answer_delays(events: &[DeskEvent]) -> impl Iterator<Item = f64> + '_ {
    events
        .iter()
        .filter(|e| e.kind == EventKind::CallAnswered)
        .filter_map(|e| e.answer_delay_s)
}

/// Abandonment rate: abandoned calls as a percentage of offered calls.
pub fn aba(events: &[DeskEvent]) -> Option<f64> {
    pct(count(events, EventKind::CallAbandoned), count(events, EventKind::CallOffered))
}

/// Average speed to answer, in seconds.
pub fn asa(events: &[DeskEvent]) -> Option<f64> {
    let (n, sum) = answer_delays(events).fold((0usize, 0.0), |(n, s), d| (n + 1, s + d));
    (n > 0).then(|| sum / n as f64)
}

/// Time service factor: answered calls with delay at or under the threshold.
pub fn tsf(events: &[DeskEvent], threshold_s: f64) -> Result<Option<f64>> {
    if !(threshold_s > 0.0 && threshold_s.is_finite()) {
        return Err(Error::validation(format!(
            "TSF threshold must be positive, got {threshold_s}"
        )));
    }
    let (within, answered) = answer_delays(events)
        .fold((0, 0), |(w, n), d| (w + usize::from(d <= threshold_s), n + 1));
    Ok(pct(within, answered))
}

/// First-call resolution: resolved cases that never saw a callback.
pub fn fcr(events: &[DeskEvent]) -> Option<f64> {
    let case_ids = |kind| -> HashSet<&str> {
        events
            .iter()
            .filter(|e| e.kind == kind)
            .filter_map(|e| e.case_id.as_deref())
            .collect()
    };
    let resolved = case_ids(EventKind::CaseResolved);
    let called_back = case_ids(EventKind::CallbackOccurred);
    let clean = resolved.iter().filter(|c| !called_back.contains(*c)).count();
    pct(clean, resolved.len())
}

/// Turn-around time of a completed request.
pub fn tat(request: &Request) -> Option<TimeDelta> {
    if request.status != Status::Completed {
        return None;
    }
    let done = request.completion?;
    Some(if done.has_time() && request.creation.has_time() {
        done.to_datetime() - request.creation.to_datetime()
    } else {
        done.date() - request.creation.date()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Outage {
    start: NaiveDateTime,
    end: Option<NaiveDateTime>,
}

/// Pairs OutageStart/OutageEnd events in time order. Events sharing a
/// timestamp keep their log order.
fn outages(events: &[DeskEvent]) -> Result<Vec<Outage>> {
    let mut indexed: Vec<(usize, &DeskEvent)> = events
        .iter()
        .enumerate()
        .filter(|(_, e)| matches!(e.kind, EventKind::OutageStart | EventKind::OutageEnd))
        .collect();
    indexed.sort_by_key(|(i, e)| (e.at, *i));

    let mut out = Vec::new();
    let mut open: Option<(usize, NaiveDateTime)> = None;
    let mut bad = Vec::new();
    for (i, e) in indexed {
        match (e.kind, open) {
            (EventKind::OutageStart, None) => open = Some((i, e.at)),
            (EventKind::OutageStart, Some((j, _))) => {
                bad.push(format!("event {i}: OutageStart while outage from event {j} is open"))
            }
            (EventKind::OutageEnd, Some((_, start))) => {
                out.push(Outage {
                    start,
                    end: Some(e.at),
                });
                open = None;
            }
            (EventKind::OutageEnd, None) => {
                bad.push(format!("event {i}: OutageEnd without a matching OutageStart"))
            }
            _ => unreachable!("filtered to outage events"),
        }
    }
    if !bad.is_empty() {
        return Err(Error::Validation(format!("malformed outage log: {}", bad.join("; "))));
    }
    if let Some((_, start)) = open {
        out.push(Outage { start, end: None });
    }
    Ok(out)
}

/// Mean time to recover over outages that ended inside the window, and the
/// percentage of the window the service was up. An outage still open at
/// `window_end` counts as down through `window_end`.
pub fn mttr_and_uptime(
    events: &[DeskEvent],
    window_start: NaiveDateTime,
    window_end: NaiveDateTime,
) -> Result<(Option<TimeDelta>, f64)> {
    if window_end <= window_start {
        return Err(Error::validation("metrics window must end after it starts"));
    }
    let outages = outages(events)?;

    let recovered: Vec<TimeDelta> = outages
        .iter()
        .filter_map(|o| o.end.map(|end| (o.start, end)))
        .filter(|(_, end)| *end >= window_start && *end <= window_end)
        .map(|(start, end)| end - start)
        .collect();
    let mttr = (!recovered.is_empty()).then(|| {
        let total: TimeDelta = recovered.iter().copied().sum();
        total / recovered.len() as i32
    });

    let down: TimeDelta = outages
        .iter()
        .map(|o| {
            let start = o.start.max(window_start);
            let end = o.end.unwrap_or(window_end).min(window_end);
            (end - start).max(TimeDelta::zero())
        })
        .sum();
    let window = window_end - window_start;
    let uptime = if down.is_zero() {
        100.0
    } else {
        let w = window.num_milliseconds() as f64;
        ((w - down.num_milliseconds() as f64) / w * 100.0).clamp(0.0, 100.0)
    };
    Ok((mttr, uptime))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub aba_pct: Option<f64>,
    pub asa_s: Option<f64>,
    pub tsf_pct: Option<f64>,
    pub tsf_threshold_s: f64,
    pub fcr_pct: Option<f64>,
    /// Mean time to recover, in seconds.
    pub mttr_s: Option<f64>,
    pub uptime_pct: Option<f64>,
}

impl MetricsReport {
    /// Computes every metric. Without an explicit window, MTTR and uptime use
    /// the span of the log; a log with no span and no outages is 100% up.
    pub fn compute(
        events: &[DeskEvent],
        tsf_threshold_s: f64,
        window: Option<(NaiveDateTime, NaiveDateTime)>,
    ) -> Result<Self> {
        for (i, e) in events.iter().enumerate() {
            e.validate()
                .map_err(|err| Error::Validation(format!("event {i}: {err}")))?;
        }
        let window = window.or_else(|| {
            let first = events.iter().map(|e| e.at).min()?;
            let last = events.iter().map(|e| e.at).max()?;
            (last > first).then_some((first, last))
        });
        let (mttr, uptime) = match window {
            Some((start, end)) => {
                let (m, u) = mttr_and_uptime(events, start, end)?;
                (m, Some(u))
            }
            None => {
                let outages = outages(events)?;
                (None, outages.is_empty().then_some(100.0))
            }
        };
        Ok(MetricsReport {
            aba_pct: aba(events),
            asa_s: asa(events),
            tsf_pct: tsf(events, tsf_threshold_s)?,
            tsf_threshold_s,
            fcr_pct: fcr(events),
            mttr_s: mttr.map(|d| d.num_milliseconds() as f64 / 1000.0),
            uptime_pct: uptime,
        })
    }
}
