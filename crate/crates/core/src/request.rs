//! Tracked service requests and their lifecycle.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::priority::Priority;
use crate::timestamp::Timestamp;

/// Request identifier: `R` followed by digits, or a legacy all-digit id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct IssueId(String);

impl IssueId {
    pub fn new(raw: impl Into<String>) -> Result<Self> {
        let raw = raw.into();
        let digits = raw.strip_prefix('R').unwrap_or(&raw);
        if !digits.bytes().all(|b| b.is_ascii_digit()) || digits.parse::<u64>().is_err() {
            return Err(Error::validation(format!(
                "issue id '{raw}' must be 'R' followed by digits"
            )));
        }
        Ok(IssueId(raw))
    }

    /// Allocated form: `R` plus the sequence zero-padded to four digits.
    pub fn from_seq(seq: u64) -> Self {
        IssueId(format!("R{seq:04}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn numeric_suffix(&self) -> u64 {
        self.0
            .trim_start_matches('R')
            .parse()
            .expect("validated on construction")
    }
}

impl TryFrom<String> for IssueId {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        IssueId::new(s)
    }
}

impl From<IssueId> for String {
    fn from(id: IssueId) -> Self {
        id.0
    }
}

impl FromStr for IssueId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        IssueId::new(s.trim())
    }
}

impl fmt::Display for IssueId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Open,
    Assigned,
    #[serde(alias = "Work In Progress")]
    WorkInProgress,
    Completed,
}

impl Status {
    pub const ALL: [Status; 4] = [
        Status::Open,
        Status::Assigned,
        Status::WorkInProgress,
        Status::Completed,
    ];

    /// Spreadsheet label.
    pub fn label(&self) -> &'static str {
        match self {
            Status::Open => "Open",
            Status::Assigned => "Assigned",
            Status::WorkInProgress => "Work In Progress",
            Status::Completed => "Completed",
        }
    }

    pub fn is_open(&self) -> bool {
        !matches!(self, Status::Completed)
    }

    fn successor(&self) -> Option<Status> {
        match self {
            Status::Open => Some(Status::Assigned),
            Status::Assigned => Some(Status::WorkInProgress),
            Status::WorkInProgress => Some(Status::Completed),
            Status::Completed => None,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Status {
    type Err = Error;

    /// Case and whitespace insensitive: `Work in Progress`, `WorkInProgress`.
    fn from_str(s: &str) -> Result<Self> {
        let squashed: String = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '_' && *c != '-')
            .collect();
        Status::ALL
            .into_iter()
            .find(|st| format!("{st:?}").eq_ignore_ascii_case(&squashed))
            .ok_or_else(|| Error::Parse(format!("unknown status '{}'", s.trim())))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Request {
    pub issue_id: IssueId,
    pub creation: Timestamp,
    pub issue_type: String,
    pub priority: Priority,
    pub subject: String,
    pub status: Status,
    #[serde(default)]
    pub completion: Option<Timestamp>,
    #[serde(default)]
    pub assignee: Option<String>,
}

impl Request {
    /// A freshly registered request in the Open state.
    pub fn open(
        issue_id: IssueId,
        creation: Timestamp,
        issue_type: impl Into<String>,
        priority: Priority,
        subject: impl Into<String>,
    ) -> Self {
        Request {
            issue_id,
            creation,
            issue_type: issue_type.into(),
            priority,
            subject: subject.into(),
            status: Status::Open,
            completion: None,
            assignee: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_without_assignee()?;
        if self.status == Status::Assigned && blank(&self.assignee) {
            return Err(Error::validation(format!(
                "{}: Assigned requests need an assignee",
                self.issue_id
            )));
        }
        Ok(())
    }

    /// Every invariant except the assignee rule, for report files that do
    /// not carry the assignee.
    pub(crate) fn validate_without_assignee(&self) -> Result<()> {
        let id = &self.issue_id;
        if self.issue_type.trim().is_empty() {
            return Err(Error::validation(format!("{id}: issue type is empty")));
        }
        match (self.status, self.completion) {
            (Status::Completed, None) => {
                return Err(Error::validation(format!(
                    "{id}: Completed requests need a completion date"
                )))
            }
            (status, Some(_)) if status != Status::Completed => {
                return Err(Error::validation(format!(
                    "{id}: only Completed requests carry a completion date"
                )))
            }
            (_, Some(done)) if done.cmp_instant(&self.creation) == Ordering::Less => {
                return Err(Error::validation(format!(
                    "{id}: completion {done} precedes creation {}",
                    self.creation
                )))
            }
            _ => {}
        }
        Ok(())
    }

    /// Moves one step along Open → Assigned → WorkInProgress → Completed.
    ///
    /// `at` becomes the completion instant when completing; `assignee`
    /// replaces the current assignee when given.
    pub fn transition(
        &self,
        new_status: Status,
        at: Option<Timestamp>,
        assignee: Option<String>,
    ) -> Result<Request> {
        let id = &self.issue_id;
        if new_status == Status::Completed && at.is_none() {
            return Err(Error::validation(format!(
                "{id}: completing a request needs a completion date"
            )));
        }
        let assignee = assignee.or_else(|| self.assignee.clone());
        if new_status == Status::Assigned && blank(&assignee) {
            return Err(Error::validation(format!("{id}: assigning needs an assignee")));
        }
        if self.status.successor() != Some(new_status) {
            return Err(Error::State(format!(
                "{id}: {} -> {} is not allowed",
                self.status, new_status
            )));
        }
        let next = Request {
            status: new_status,
            completion: if new_status == Status::Completed { at } else { None },
            assignee,
            ..self.clone()
        };
        next.validate()?;
        Ok(next)
    }
}

/// A partial change to a request: one lifecycle step, a new priority, a new
/// assignee, or any mix of those.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequestUpdate {
    #[serde(default)]
    pub status: Option<Status>,
    /// Only together with `status: Completed`.
    #[serde(default)]
    pub completion: Option<Timestamp>,
    #[serde(default)]
    pub assignee: Option<String>,
    #[serde(default)]
    pub priority: Option<Priority>,
}

impl Request {
    pub fn apply(&self, update: RequestUpdate) -> Result<Request> {
        if update.completion.is_some() && update.status != Some(Status::Completed) {
            return Err(Error::validation(
                "completion is only set together with status Completed",
            ));
        }
        if update.status.is_none() && update.priority.is_none() && update.assignee.is_none() {
            return Err(Error::validation("nothing to update"));
        }
        let mut next = match update.status {
            Some(status) => self.transition(status, update.completion, update.assignee)?,
            None => {
                let mut r = self.clone();
                if let Some(a) = update.assignee {
                    r.assignee = Some(a).filter(|a| !a.trim().is_empty());
                }
                r
            }
        };
        if let Some(p) = update.priority {
            next.priority = p;
        }
        next.validate()?;
        Ok(next)
    }
}

fn blank(s: &Option<String>) -> bool {
    s.as_deref().is_none_or(|s| s.trim().is_empty())
}
