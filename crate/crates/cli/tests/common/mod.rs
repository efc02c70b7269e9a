#![allow(dead_code)]

use std::path::{Path, PathBuf};

use chrono::{NaiveDate, TimeDelta};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use sha2::{Digest, Sha256};

use slatrack_core::store::import_csv;
use slatrack_core::{IssueId, Priority, Request, Status, Store, StoreLock, Timestamp};

pub const DETAILED: &[u8] = include_bytes!("../../../core/tests/data/detailed_requests.csv");
pub const SHEET: &[u8] = include_bytes!("../../../core/tests/data/request_sheet.csv");
pub const EVENTS: &[u8] = include_bytes!("../../../core/tests/data/sample_events.csv");
pub const JOBS: &[u8] = include_bytes!("../../../core/tests/data/sample_jobs.csv");

pub const ISSUE_TYPES: [&str; 4] = [
    "New Construction Requests",
    "Water Connection Requests",
    "Billing",
    "Meter, Repair",
];

pub fn may(d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(2014, 5, d).unwrap()
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Valid requests with a spread of priorities, statuses, issue types and
/// both date and date-time timestamps.
pub fn random_requests(rng: &mut StdRng, n: usize) -> Vec<Request> {
    let epoch = may(1);
    (0..n)
        .map(|i| {
            let day = epoch + TimeDelta::days(rng.random_range(-20..40));
            let creation = if rng.random_bool(0.3) {
                Timestamp::DateTime(day.and_hms_opt(rng.random_range(0..24), rng.random_range(0..60), 0).unwrap())
            } else {
                Timestamp::Date(day)
            };
            let priority = Priority::ALL[rng.random_range(0..Priority::ALL.len())];
            let status = Status::ALL[rng.random_range(0..Status::ALL.len())];
            let completion = (status == Status::Completed).then(|| {
                Timestamp::Date(creation.date() + TimeDelta::days(rng.random_range(0..12)))
            });
            let assignee = match status {
                Status::Open => None,
                _ => Some(format!("agent{}", rng.random_range(0..5))),
            };
            Request {
                issue_id: IssueId::from_seq(i as u64 + 1),
                creation,
                issue_type: ISSUE_TYPES[rng.random_range(0..ISSUE_TYPES.len())].to_string(),
                priority,
                subject: format!("request {i}, \"quoted\""),
                status,
                completion,
                assignee,
            }
        })
        .collect()
}

pub fn fixture_requests() -> Vec<Request> {
    import_csv(DETAILED).unwrap().requests
}

pub fn write_store(path: &Path, requests: &[Request]) {
    let mut store = Store::empty(path);
    for r in requests {
        store.upsert(r.clone()).unwrap();
    }
    store.save(&StoreLock::exclusive(path).unwrap()).unwrap();
}

pub fn file_hash(path: &Path) -> Option<Vec<u8>> {
    std::fs::read(path).ok().map(|b| Sha256::digest(&b).to_vec())
}

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn slactl<S: AsRef<str>>(args: &[S]) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("slactl".to_string()).chain(args.iter().map(|a| a.as_ref().to_string()));
    let code = slactl::run(argv, &mut out, &mut err);
    Output {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

/// A scratch directory holding a store, a matrix file and an output dir.
pub struct Workspace {
    pub dir: tempfile::TempDir,
    pub store: PathBuf,
    pub matrix: PathBuf,
    pub out: PathBuf,
}

impl Workspace {
    pub fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("out");
        std::fs::create_dir(&out).unwrap();
        Workspace {
            store: dir.path().join("requests.csv"),
            matrix: dir.path().join("sla_matrix.json"),
            out,
            dir,
        }
    }

    pub fn with_requests(requests: &[Request]) -> Self {
        let ws = Self::new();
        write_store(&ws.store, requests);
        ws
    }

    /// Runs slactl against this workspace.
    pub fn run<S: AsRef<str>>(&self, args: &[S]) -> Output {
        let mut argv: Vec<String> = vec![
            "--store".into(),
            self.store.display().to_string(),
            "--matrix".into(),
            self.matrix.display().to_string(),
            "--out-dir".into(),
            self.out.display().to_string(),
        ];
        argv.extend(args.iter().map(|a| a.as_ref().to_string()));
        slactl(&argv)
    }
}
