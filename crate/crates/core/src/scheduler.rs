//! Single-machine, non-preemptive dispatch: priority-only versus
//! earliest-deadline-first.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::csvio;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub id: String,
    pub duration_h: f64,
    /// Hours from t = 0.
    pub deadline_h: f64,
    /// Higher runs first under priority-only dispatch.
    pub priority: i64,
}

impl Job {
    pub fn new(id: impl Into<String>, duration_h: f64, deadline_h: f64, priority: i64) -> Self {
        Job {
            id: id.into(),
            duration_h,
            deadline_h,
            priority,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.trim().is_empty() {
            return Err(Error::validation("job id is empty"));
        }
        for (name, v) in [("duration", self.duration_h), ("deadline", self.deadline_h)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(format!(
                    "job {}: {name} must be positive, got {v}",
                    self.id
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Policy {
    PriorityOnly,
    #[serde(rename = "EDF")]
    Edf,
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Policy::PriorityOnly => "PriorityOnly",
            Policy::Edf => "EDF",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleResult {
    pub policy: Policy,
    pub order: Vec<String>,
    pub finish_times: BTreeMap<String, f64>,
    pub missed: BTreeSet<String>,
}

fn check(jobs: &[Job]) -> Result<()> {
    if jobs.is_empty() {
        return Err(Error::validation("job list is empty"));
    }
    let mut seen = HashSet::new();
    for job in jobs {
        job.validate()?;
        if !seen.insert(job.id.as_str()) {
            return Err(Error::validation(format!("duplicate job id '{}'", job.id)));
        }
    }
    Ok(())
}

/// Runs jobs back to back from t = 0 in the given order.
pub fn run_in_order(policy: Policy, order: &[&Job]) -> ScheduleResult {
    let mut clock = 0.0;
    let mut finish_times = BTreeMap::new();
    let mut missed = BTreeSet::new();
    for job in order {
        clock += job.duration_h;
        finish_times.insert(job.id.clone(), clock);
        if clock > job.deadline_h {
            missed.insert(job.id.clone());
        }
    }
    ScheduleResult {
        policy,
        order: order.iter().map(|j| j.id.clone()).collect(),
        finish_times,
        missed,
    }
}

fn dispatch(
    policy: Policy,
    jobs: &[Job],
    cmp: impl Fn(&Job, &Job) -> Ordering,
) -> Result<ScheduleResult> {
    check(jobs)?;
    let mut order: Vec<&Job> = jobs.iter().collect();
    order.sort_by(|a, b| cmp(a, b));
    Ok(run_in_order(policy, &order))
}

/// Descending priority, ties by ascending id.
pub fn schedule_priority_only(jobs: &[Job]) -> Result<ScheduleResult> {
    dispatch(Policy::PriorityOnly, jobs, |a, b| {
        b.priority.cmp(&a.priority).then_with(|| a.id.cmp(&b.id))
    })
}

/// Ascending deadline, ties by descending priority, then ascending id.
pub fn schedule_edf(jobs: &[Job]) -> Result<ScheduleResult> {
    dispatch(Policy::Edf, jobs, |a, b| {
        a.deadline_h
            .total_cmp(&b.deadline_h)
            .then_with(|| b.priority.cmp(&a.priority))
            .then_with(|| a.id.cmp(&b.id))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobDelta {
    pub id: String,
    pub priority_only_finish_h: f64,
    pub edf_finish_h: f64,
    /// EDF finish minus priority-only finish.
    pub delta_h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub priority_only: ScheduleResult,
    pub edf: ScheduleResult,
    pub priority_only_missed: usize,
    pub edf_missed: usize,
    /// One entry per job in input order.
    pub deltas: Vec<JobDelta>,
}

pub fn compare(jobs: &[Job]) -> Result<Comparison> {
    let priority_only = schedule_priority_only(jobs)?;
    let edf = schedule_edf(jobs)?;
    let deltas = jobs
        .iter()
        .map(|j| {
            let p = priority_only.finish_times[&j.id];
            let e = edf.finish_times[&j.id];
            JobDelta {
                id: j.id.clone(),
                priority_only_finish_h: p,
                edf_finish_h: e,
                delta_h: e - p,
            }
        })
        .collect();
    Ok(Comparison {
        priority_only_missed: priority_only.missed.len(),
        edf_missed: edf.missed.len(),
        priority_only,
        edf,
        deltas,
    })
}

impl Comparison {
    /// `id,priority,deadline_h,priority_only_finish_h,priority_only_missed,edf_finish_h,edf_missed,delta_h`
    pub fn to_csv(&self, jobs: &[Job]) -> Vec<u8> {
        let mut buf = Vec::new();
        {
            let mut w = csvio::writer(&mut buf);
            w.write_record([
                "id",
                "priority",
                "deadline_h",
                "priority_only_finish_h",
                "priority_only_missed",
                "edf_finish_h",
                "edf_missed",
                "delta_h",
            ])
            .expect("write to Vec");
            for (job, d) in jobs.iter().zip(&self.deltas) {
                w.write_record([
                    job.id.clone(),
                    job.priority.to_string(),
                    job.deadline_h.to_string(),
                    d.priority_only_finish_h.to_string(),
                    self.priority_only.missed.contains(&job.id).to_string(),
                    d.edf_finish_h.to_string(),
                    self.edf.missed.contains(&job.id).to_string(),
                    d.delta_h.to_string(),
                ])
                .expect("write to Vec");
            }
            w.flush().expect("flush Vec");
        }
        buf
    }
}

pub const JOB_HEADER: [&str; 4] = ["id", "duration_h", "deadline_h", "priority"];

/// Reads a job set with header `id,duration_h,deadline_h,priority`.
pub fn parse_jobs_csv(bytes: &[u8]) -> Result<Vec<Job>> {
    let mut rdr = csvio::reader(bytes);
    let headers = rdr.headers().map_err(csvio::csv_err)?.clone();
    let cols = csvio::Columns::locate(&headers, &JOB_HEADER)?;
    let mut jobs = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(csvio::csv_err)?;
        let field = |name: &str| {
            cols.get(&record, name)
                .map(str::trim)
                .ok_or_else(|| Error::Parse(format!("job row {}: '{name}' is empty", i + 1)))
        };
        let num = |name: &str| -> Result<f64> {
            field(name)?
                .parse()
                .map_err(|e| Error::Parse(format!("job row {}: bad {name}: {e}", i + 1)))
        };
        let job = Job {
            id: field("id")?.to_string(),
            duration_h: num("duration_h")?,
            deadline_h: num("deadline_h")?,
            priority: field("priority")?
                .parse()
                .map_err(|e| Error::Parse(format!("job row {}: bad priority: {e}", i + 1)))?,
        };
        job.validate()?;
        jobs.push(job);
    }
    Ok(jobs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn two_job_instance() -> Vec<Job> {
        vec![Job::new("A", 3.0, 3.0, 2), Job::new("B", 3.0, 2.0, 1)]
    }

    fn feasible_instance() -> Vec<Job> {
        vec![Job::new("A", 3.0, 6.0, 2), Job::new("B", 2.0, 2.0, 1)]
    }

    #[test]
    fn priority_only_misses_b_on_two_job_instance() {
        let r = schedule_priority_only(&two_job_instance()).unwrap();
        assert_eq!(r.order, ids(&["A", "B"]));
        assert_eq!(r.finish_times["A"], 3.0);
        assert_eq!(r.finish_times["B"], 6.0);
        assert_eq!(r.missed, BTreeSet::from(["B".to_string()]));
    }

    #[test]
    fn edf_on_two_job_instance_misses_both() {
        let r = schedule_edf(&two_job_instance()).unwrap();
        assert_eq!(r.order, ids(&["B", "A"]));
        assert_eq!(r.missed.len(), 2);
    }

    #[test]
    fn edf_meets_all_on_feasible_instance() {
        let r = schedule_edf(&feasible_instance()).unwrap();
        assert_eq!(r.order, ids(&["B", "A"]));
        assert_eq!(r.finish_times["B"], 2.0);
        assert_eq!(r.finish_times["A"], 5.0);
        assert!(r.missed.is_empty());
        let p = schedule_priority_only(&feasible_instance()).unwrap();
        assert_eq!(p.order, ids(&["A", "B"]));
        assert_eq!(p.missed, BTreeSet::from(["B".to_string()]));
    }

    #[test]
    fn ties_break_by_id() {
        let jobs = vec![Job::new("b", 1.0, 10.0, 1), Job::new("a", 2.0, 10.0, 1)];
        let r = schedule_priority_only(&jobs).unwrap();
        assert_eq!(r.order, ids(&["a", "b"]));
        assert_eq!(r.finish_times["a"], 2.0);
        assert_eq!(r.finish_times["b"], 3.0);
        assert_eq!(schedule_edf(&jobs).unwrap().order, ids(&["a", "b"]));
    }

    #[test]
    fn compare_summaries() {
        let c = compare(&feasible_instance()).unwrap();
        assert_eq!((c.priority_only_missed, c.edf_missed), (1, 0));
        assert_eq!(c.deltas[0].id, "A");
        assert_eq!(c.deltas[0].delta_h, 2.0);
        assert_eq!(c.deltas[1].delta_h, -3.0);

        let c = compare(&two_job_instance()).unwrap();
        assert_eq!((c.priority_only_missed, c.edf_missed), (1, 2));

        let single = vec![Job::new("X", 1.0, 2.0, 0)];
        let c = compare(&single).unwrap();
        assert_eq!(c.priority_only.order, c.edf.order);
        assert_eq!(c.priority_only.missed, c.edf.missed);
        assert!(c.edf.missed.is_empty());
    }

    #[test]
    fn rejects_bad_job_sets() {
        assert!(schedule_edf(&[]).is_err());
        assert!(schedule_priority_only(&[Job::new("A", 0.0, 1.0, 1)]).is_err());
        assert!(schedule_priority_only(&[Job::new("A", 1.0, -1.0, 1)]).is_err());
        assert!(schedule_edf(&[Job::new("A", 1.0, 1.0, 1), Job::new("A", 1.0, 1.0, 1)]).is_err());
    }

    #[test]
    fn jobs_csv() {
        let jobs = parse_jobs_csv(b"id,duration_h,deadline_h,priority\nA,3,3,2\nB,3,2,1\n").unwrap();
        assert_eq!(jobs, two_job_instance());
        assert!(parse_jobs_csv(b"id,duration_h,deadline_h,priority\nA,x,3,2\n").is_err());
        let csv = String::from_utf8(compare(&jobs).unwrap().to_csv(&jobs)).unwrap();
        assert_eq!(csv.lines().nth(2).unwrap(), "B,1,2,6,true,3,true,-3");
    }
}
