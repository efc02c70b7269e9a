//! Deterministic fixtures shared by the benches.

use chrono::{NaiveDate, TimeDelta};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use slatrack_core::scheduler::Job;
use slatrack_core::{IssueId, Priority, Request, Status, Timestamp};

const TYPES: [&str; 3] = ["Billing", "Water Connection Requests", "Meter Repair"];

pub fn epoch() -> NaiveDate {
    NaiveDate::from_ymd_opt(2014, 5, 1).unwrap()
}

pub fn requests(n: usize, seed: u64) -> Vec<Request> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let creation = Timestamp::Date(epoch() + TimeDelta::days(rng.random_range(-30..30)));
            let status = Status::ALL[rng.random_range(0..Status::ALL.len())];
            Request {
                issue_id: IssueId::from_seq(i as u64 + 1),
                creation,
                issue_type: TYPES[rng.random_range(0..TYPES.len())].to_string(),
                priority: Priority::ALL[rng.random_range(0..Priority::ALL.len())],
                subject: format!("request {i}"),
                status,
                completion: (status == Status::Completed)
                    .then(|| Timestamp::Date(creation.date() + TimeDelta::days(rng.random_range(0..8)))),
                assignee: (status != Status::Open).then(|| "agent".to_string()),
            }
        })
        .collect()
}

pub fn jobs(n: usize, seed: u64) -> Vec<Job> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            Job::new(
                format!("J{i}"),
                f64::from(rng.random_range(1..8)),
                f64::from(rng.random_range(1..(n as u32 * 4).max(2))),
                rng.random_range(0..5),
            )
        })
        .collect()
}
