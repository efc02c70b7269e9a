//! Acceptance suite: one PASS/FAIL line per criterion, then a summary.
//!
//! Run with `cargo test -p slactl --test acceptance -- --nocapture` to see
//! the lines. Everything goes through `slactl` or the library directly; the
//! API criterion drives the router in-process, so no server is started.
//!
//! The published detailed table has three rows, R1234, R1236 and R1239, whose
//! due dates match no reading of the default matrix. They are errata and are
//! not checked (see `ERRATA`).

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use chrono::{Datelike, NaiveDate, NaiveDateTime, TimeDelta, Weekday};
use rand::rngs::StdRng;
use rand::Rng;
use serde_json::Value;

use common::*;
use slatrack_core::metrics::{self, DeskEvent, EventKind};
use slatrack_core::report::{self, build_detailed, build_overview};
use slatrack_core::scheduler::{self, Job};
use slatrack_core::sla::compute_due_date;
use slatrack_core::store::{export_csv, import_csv};
use slatrack_core::{
    CalendarMode, Priority, PriorityMatrix, Request, SlaDuration, SlaPolicy, Status, Timestamp,
    WorkCalendar,
};

const ERRATA: [&str; 3] = ["R1234", "R1236", "R1239"];

type Check = fn() -> Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

#[test]
fn acceptance() {
    let criteria: [(&str, Check); 8] = [
        ("default priority matrix", default_matrix),
        ("published due dates (consistent rows)", published_due_dates),
        ("overview equals brute-force recount", overview_recount),
        ("business-day due dates equal day walk", business_day_walk),
        ("scheduler golden and EDF optimality", scheduler_golden),
        ("desk metrics bounds and counting oracles", metrics_oracles),
        ("file determinism and import/export fixed point", file_determinism),
        ("API conformance and 4xx immutability", api_conformance),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(format!("panic: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {name} ({secs:.2}s): {detail}"),
            Err(why) => {
                println!("[FAIL] {name} ({secs:.2}s): {why}");
                failed.push(name);
            }
        }
    }
    println!("{}/{} criteria passed", 8 - failed.len(), 8);
    assert!(failed.is_empty(), "failed: {failed:?}");
}

fn within(limit: Duration, start: Instant, what: &str) -> Result<(), String> {
    let took = start.elapsed();
    ensure!(took < limit, "{what} took {took:?}, limit {limit:?}");
    Ok(())
}

// ---- default matrix --------------------------------------------------------

fn default_matrix() -> Result<String, String> {
    let start = Instant::now();
    let ws = Workspace::new();
    let o = ws.run(&["show-matrix", "--format", "json"]);
    ensure!(o.code == 0, "show-matrix exited {}: {}", o.code, o.stderr);
    let policy = SlaPolicy::from_json(o.stdout.as_bytes()).map_err(|e| e.to_string())?;
    let expected = [
        (Priority::Critical, 1),
        (Priority::High, 2),
        (Priority::Medium, 3),
        (Priority::Low, 5),
    ];
    for (p, days) in expected {
        let got = policy.matrix.duration_for(p).map_err(|e| e.to_string())?;
        ensure!(got == Some(SlaDuration::days(days)), "{p}: {got:?}, want {days} days");
    }
    ensure!(policy.matrix.entries().len() == 4, "extra matrix entries");
    ensure!(policy.matrix.calendar_mode() == CalendarMode::CalendarDays, "not calendar days");
    ensure!(!ws.matrix.exists(), "reading the matrix wrote a file");
    within(Duration::from_secs(1), start, "default matrix")?;
    Ok("Critical 1, High 2, Medium 3, Low 5 days".into())
}

// ---- published detailed rows -----------------------------------------------

fn due_dates_from_cli(ws: &Workspace) -> Result<BTreeMap<String, String>, String> {
    let o = ws.run(&["calc-sla", "--format", "csv", "--as-of", "2014-05-10"]);
    ensure!(o.code == 0, "calc-sla exited {}: {}", o.code, o.stderr);
    let rows = report::parse_detailed_csv(o.stdout.as_bytes()).map_err(|e| e.to_string())?;
    Ok(rows
        .into_iter()
        .map(|r| {
            let due = r.due_date.map(|d| d.to_string()).unwrap_or_default();
            (r.request.issue_id.to_string(), due)
        })
        .collect())
}

fn published_due_dates() -> Result<String, String> {
    let ws = Workspace::with_requests(&fixture_requests());
    let calendar_days = [
        ("R1235", "2014-05-07"),
        ("R1238", "2014-05-10"),
        ("R1240", "2014-05-09"),
        ("R1241", "2014-05-11"),
        ("R1242", "2014-05-14"),
        ("R1243", "2014-05-15"),
    ];
    let dues = due_dates_from_cli(&ws)?;
    for (id, want) in calendar_days {
        ensure!(!ERRATA.contains(&id), "{id} is listed as errata");
        ensure!(dues.get(id).map(String::as_str) == Some(want), "{id}: got {:?}, want {want}", dues.get(id));
    }

    let o = ws.run(&["set-matrix", "--calendar-mode", "business"]);
    ensure!(o.code == 0, "set-matrix exited {}", o.code);
    let dues = due_dates_from_cli(&ws)?;
    let r1237 = dues.get("R1237").map(String::as_str);
    ensure!(r1237 == Some("2014-05-06"), "R1237 under business days: {r1237:?}");
    Ok(format!(
        "7 rows exact; errata {} not checked",
        ERRATA.join("/")
    ))
}

// ---- overview recount ------------------------------------------------------

fn calendar_due(creation: Timestamp, days: u32) -> Timestamp {
    match creation {
        Timestamp::Date(d) => Timestamp::Date(d + TimeDelta::days(days.into())),
        Timestamp::DateTime(t) => Timestamp::DateTime(t + TimeDelta::days(days.into())),
    }
}

fn completed_late(completion: Timestamp, due: Timestamp) -> bool {
    match (completion, due) {
        (Timestamp::DateTime(c), Timestamp::DateTime(d)) => c > d,
        _ => completion.date() > due.date(),
    }
}

struct Recount {
    all_open: u64,
    per_type: BTreeMap<String, u64>,
    due_today: u64,
    missed: u64,
}

fn recount(requests: &[Request], as_of: NaiveDate) -> BTreeMap<Priority, Recount> {
    let days = |p: Priority| match p {
        Priority::Critical => 1,
        Priority::High => 2,
        Priority::Medium => 3,
        Priority::Low => 5,
        Priority::Planned => unreachable!(),
    };
    let columns: BTreeSet<String> = requests
        .iter()
        .filter(|r| r.priority != Priority::Planned && r.status != Status::Completed)
        .map(|r| r.issue_type.clone())
        .collect();
    let mut out = BTreeMap::new();
    for p in [Priority::Critical, Priority::High, Priority::Medium, Priority::Low] {
        let mut c = Recount {
            all_open: 0,
            per_type: columns.iter().map(|t| (t.clone(), 0)).collect(),
            due_today: 0,
            missed: 0,
        };
        for r in requests.iter().filter(|r| r.priority == p) {
            let due = calendar_due(r.creation, days(p));
            if r.status == Status::Completed {
                if completed_late(r.completion.unwrap(), due) {
                    c.missed += 1;
                }
                continue;
            }
            c.all_open += 1;
            *c.per_type.get_mut(&r.issue_type).unwrap() += 1;
            if due.date() == as_of {
                c.due_today += 1;
            }
            if as_of > due.date() {
                c.missed += 1;
            }
        }
        out.insert(p, c);
    }
    out
}

fn overview_recount() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = rng(2014);
    let matrix = PriorityMatrix::standard();
    let calendar = WorkCalendar::default();
    let mut total = 0;
    for fixture in 0..100 {
        let n = rng.random_range(0..=500);
        total += n;
        let requests = random_requests(&mut rng, n);
        let as_of = may(1) + TimeDelta::days(rng.random_range(-10..50));
        let detailed = build_detailed(&requests, &matrix, &calendar, as_of).map_err(|e| e.to_string())?;
        let overview = build_overview(&detailed);
        let oracle = recount(&requests, as_of);
        ensure!(overview.len() == 4, "fixture {fixture}: {} rows", overview.len());
        for row in &overview {
            let want = &oracle[&row.priority];
            let p = row.priority;
            ensure!(row.all_open == want.all_open, "fixture {fixture} {p}: all_open {} vs {}", row.all_open, want.all_open);
            ensure!(row.per_issue_type == want.per_type, "fixture {fixture} {p}: pivot {:?} vs {:?}", row.per_issue_type, want.per_type);
            ensure!(row.due_today == want.due_today, "fixture {fixture} {p}: due_today {} vs {}", row.due_today, want.due_today);
            ensure!(row.sla_missed == want.missed, "fixture {fixture} {p}: sla_missed {} vs {}", row.sla_missed, want.missed);
        }
    }
    within(Duration::from_secs(10), start, "100 overview fixtures")?;
    Ok(format!("100 fixtures, {total} requests"))
}

// ---- business days ---------------------------------------------------------

fn walk_working_days(from: NaiveDate, n: u32, holidays: &BTreeSet<NaiveDate>) -> NaiveDate {
    let mut day = from;
    let mut left = n;
    while left > 0 {
        day = day.succ_opt().unwrap();
        let weekend = matches!(day.weekday(), Weekday::Sat | Weekday::Sun);
        if !weekend && !holidays.contains(&day) {
            left -= 1;
        }
    }
    day
}

fn business_day_walk() -> Result<String, String> {
    let mut rng = rng(5);
    let epoch = NaiveDate::from_ymd_opt(2014, 1, 1).unwrap();
    let holidays: BTreeSet<NaiveDate> = (0..12)
        .map(|_| epoch + TimeDelta::days(rng.random_range(0..800)))
        .filter(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun))
        .collect();
    let calendars = [
        WorkCalendar::default(),
        WorkCalendar::new(WorkCalendar::default().working_weekdays(), holidays.iter().copied())
            .map_err(|e| e.to_string())?,
    ];
    let matrix = PriorityMatrix::standard().with_calendar_mode(CalendarMode::BusinessDays);
    for i in 0..1000 {
        let created = epoch + TimeDelta::days(rng.random_range(0..730));
        let priority = Priority::TRACKED[rng.random_range(0..4)];
        let cal_idx = i % 2;
        let n = matrix.duration_for(priority).unwrap().unwrap().amount;
        let got = compute_due_date(Timestamp::Date(created), priority, &matrix, &calendars[cal_idx])
            .map_err(|e| e.to_string())?;
        let empty = BTreeSet::new();
        let hol = if cal_idx == 1 { &holidays } else { &empty };
        let want = walk_working_days(created, n, hol);
        ensure!(got == Some(Timestamp::Date(want)), "{created} {priority}: {got:?}, walk says {want}");
    }
    Ok(format!("1000 pairs, {} holidays on half of them", holidays.len()))
}

// ---- scheduler -------------------------------------------------------------

fn simulate_cli(jobs_csv: &[u8]) -> Result<Value, String> {
    let ws = Workspace::new();
    let path = ws.dir.path().join("jobs.csv");
    std::fs::write(&path, jobs_csv).map_err(|e| e.to_string())?;
    let o = ws.run(&["simulate", path.to_str().unwrap(), "--format", "json"]);
    ensure!(o.code == 0, "simulate exited {}: {}", o.code, o.stderr);
    serde_json::from_str(&o.stdout).map_err(|e| e.to_string())
}

/// (misses, max lateness) of running jobs in the given order.
fn evaluate_order(jobs: &[Job], order: &[usize]) -> (usize, f64) {
    let mut clock = 0.0;
    let mut misses = 0;
    let mut max_late = f64::NEG_INFINITY;
    for &i in order {
        clock += jobs[i].duration_h;
        let late = clock - jobs[i].deadline_h;
        if late > 0.0 {
            misses += 1;
        }
        max_late = max_late.max(late);
    }
    (misses, max_late)
}

/// Every permutation via Heap's algorithm.
fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = vec![0; n];
    f(&perm);
    let mut i = 1;
    while i < n {
        if c[i] < i {
            let j = if i % 2 == 0 { 0 } else { c[i] };
            perm.swap(j, i);
            f(&perm);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

fn random_jobs(rng: &mut StdRng, n: usize) -> Vec<Job> {
    (0..n)
        .map(|i| {
            Job::new(
                format!("J{i}"),
                f64::from(rng.random_range(1..6)),
                f64::from(rng.random_range(1..25)),
                rng.random_range(0..4),
            )
        })
        .collect()
}

fn scheduler_golden() -> Result<String, String> {
    let literal = simulate_cli(JOBS)?;
    ensure!(literal["priority_only"]["order"] == serde_json::json!(["A", "B"]), "order {}", literal["priority_only"]["order"]);
    ensure!(literal["priority_only"]["missed"] == serde_json::json!(["B"]), "missed {}", literal["priority_only"]["missed"]);

    let feasible = simulate_cli(b"id,duration_h,deadline_h,priority\nA,3,6,2\nB,2,2,1\n")?;
    ensure!(
        feasible["priority_only_missed"] == 1 && feasible["edf_missed"] == 0,
        "feasible instance: priority-only {} EDF {}",
        feasible["priority_only_missed"],
        feasible["edf_missed"]
    );

    let mut rng = rng(88);
    let mut violations = 0;
    let mut perms = 0u64;
    for set in 0..200 {
        let n = set % 8 + 1;
        let jobs = random_jobs(&mut rng, n);
        let edf = scheduler::schedule_edf(&jobs).map_err(|e| e.to_string())?;
        let index: BTreeMap<&str, usize> = jobs.iter().enumerate().map(|(i, j)| (j.id.as_str(), i)).collect();
        let edf_order: Vec<usize> = edf.order.iter().map(|id| index[id.as_str()]).collect();
        let (edf_misses, edf_late) = evaluate_order(&jobs, &edf_order);
        ensure!(edf_misses == edf.missed.len(), "set {set}: simulator and oracle disagree on misses");

        let mut best_late = f64::INFINITY;
        let mut feasible = false;
        for_each_permutation(n, |order| {
            perms += 1;
            let (misses, late) = evaluate_order(&jobs, order);
            feasible |= misses == 0;
            best_late = best_late.min(late);
        });
        if (feasible && edf_misses > 0) || edf_late > best_late {
            violations += 1;
        }
    }
    ensure!(violations == 0, "{violations} EDF optimality violations");
    Ok(format!("golden instances exact; 200 sets, {perms} permutations, 0 violations"))
}

// ---- metrics ---------------------------------------------------------------

fn random_log(rng: &mut StdRng) -> Vec<DeskEvent> {
    let t0 = may(1).and_hms_opt(8, 0, 0).unwrap();
    let at = |m: i64| t0 + TimeDelta::minutes(m);
    let mut ev = Vec::new();
    for i in 0..rng.random_range(0..80) {
        ev.push(DeskEvent::new(EventKind::CallOffered, at(i)));
        match rng.random_range(0..3) {
            0 => ev.push(DeskEvent::answered(at(i), f64::from(rng.random_range(0..90)))),
            1 => ev.push(DeskEvent::new(EventKind::CallAbandoned, at(i))),
            _ => {}
        }
    }
    for _ in 0..rng.random_range(0..25) {
        let id = format!("C{}", rng.random_range(0..10));
        ev.push(DeskEvent::for_case(EventKind::CaseResolved, at(100), id.clone()));
        if rng.random_bool(0.3) {
            ev.push(DeskEvent::for_case(EventKind::CallbackOccurred, at(120), id));
        }
    }
    let mut clock = 0;
    for _ in 0..rng.random_range(0..4) {
        clock += rng.random_range(1..200);
        ev.push(DeskEvent::new(EventKind::OutageStart, at(clock)));
        clock += rng.random_range(1..200);
        ev.push(DeskEvent::new(EventKind::OutageEnd, at(clock)));
    }
    if rng.random_bool(0.2) {
        ev.push(DeskEvent::new(EventKind::OutageStart, at(clock + 10)));
    }
    ev
}

fn metrics_oracles() -> Result<String, String> {
    let mut rng = rng(20);
    let in_range = |v: Option<f64>| v.is_none_or(|x| (0.0..=100.0).contains(&x));
    for log in 0..1000 {
        let ev = random_log(&mut rng);
        let threshold = f64::from(rng.random_range(1..60));
        let start: NaiveDateTime = may(1).and_hms_opt(7, 0, 0).unwrap();
        let end = start + TimeDelta::minutes(rng.random_range(60..2000));
        let report = metrics::MetricsReport::compute(&ev, threshold, Some((start, end))).map_err(|e| e.to_string())?;
        ensure!(
            [report.aba_pct, report.tsf_pct, report.fcr_pct, report.uptime_pct].into_iter().all(in_range),
            "log {log}: percentage out of range {report:?}"
        );
        ensure!(report.mttr_s.is_none_or(|m| m >= 0.0), "log {log}: negative MTTR");

        let count = |k: EventKind| ev.iter().filter(|e| e.kind == k).count();
        let offered = count(EventKind::CallOffered);
        let abandoned = count(EventKind::CallAbandoned);
        let delays: Vec<f64> = ev.iter().filter_map(|e| e.answer_delay_s).collect();
        let within_t = delays.iter().filter(|d| **d <= threshold).count();
        let aba = (offered > 0).then(|| abandoned as f64 * 100.0 / offered as f64);
        let tsf = (!delays.is_empty()).then(|| within_t as f64 * 100.0 / delays.len() as f64);
        let mut cases: BTreeMap<&str, bool> = BTreeMap::new();
        for e in &ev {
            let id = e.case_id.as_deref().unwrap_or("");
            match e.kind {
                EventKind::CaseResolved => {
                    cases.entry(id).or_insert(false);
                }
                EventKind::CallbackOccurred => {
                    cases.insert(id, true);
                }
                _ => {}
            }
        }
        let resolved: Vec<_> = cases.iter().filter(|(id, _)| ev.iter().any(|e| e.kind == EventKind::CaseResolved && e.case_id.as_deref() == Some(**id))).collect();
        let clean = resolved.iter().filter(|(_, cb)| !**cb).count();
        let fcr = (!resolved.is_empty()).then(|| clean as f64 * 100.0 / resolved.len() as f64);
        ensure!(report.aba_pct == aba, "log {log}: ABA {:?} vs {aba:?}", report.aba_pct);
        ensure!(report.tsf_pct == tsf, "log {log}: TSF {:?} vs {tsf:?}", report.tsf_pct);
        ensure!(report.fcr_pct == fcr, "log {log}: FCR {:?} vs {fcr:?}", report.fcr_pct);
    }

    let ws = Workspace::new();
    let path = ws.dir.path().join("events.csv");
    std::fs::write(&path, EVENTS).map_err(|e| e.to_string())?;
    let o = ws.run(&["metrics", path.to_str().unwrap(), "--tsf-threshold", "20", "--format", "json"]);
    ensure!(o.code == 0, "metrics exited {}: {}", o.code, o.stderr);
    let v: Value = serde_json::from_str(&o.stdout).map_err(|e| e.to_string())?;
    ensure!(v["tsf_pct"].as_f64() == Some(80.0), "seeded fixture TSF {}", v["tsf_pct"]);
    Ok("1000 logs in range and equal to oracles; seeded TSF 80.0".into())
}

// ---- files -----------------------------------------------------------------

fn file_determinism() -> Result<String, String> {
    let requests = random_requests(&mut rng(31), 300);
    let ws = Workspace::with_requests(&requests);
    let read_all = |paths: &str| -> Result<Vec<Vec<u8>>, String> {
        paths.lines().map(|p| std::fs::read(p).map_err(|e| format!("{p}: {e}"))).collect()
    };
    let first = ws.run(&["prepare-sla-file", "--as-of", "2014-05-10"]);
    ensure!(first.code == 0, "prepare-sla-file exited {}: {}", first.code, first.stderr);
    let a = read_all(&first.stdout)?;
    let second = ws.run(&["prepare-sla-file", "--as-of", "2014-05-10"]);
    ensure!(second.stdout == first.stdout, "different paths on the second run");
    let b = read_all(&second.stdout)?;
    ensure!(a == b, "files differ between runs");

    // the overview is a function of the detailed file alone
    let parsed = report::parse_detailed_csv(&a[1]).map_err(|e| e.to_string())?;
    ensure!(report::overview_csv(&build_overview(&parsed)) == a[0], "overview not reproducible from detailed CSV");

    let exported = ws.run(&["export"]);
    ensure!(exported.code == 0, "export exited {}", exported.code);
    let outcome = import_csv(exported.stdout.as_bytes()).map_err(|e| e.to_string())?;
    ensure!(outcome.errors.is_empty(), "re-import rejected rows: {:?}", outcome.errors);
    ensure!(outcome.requests == requests, "import(export(store)) changed the requests");
    ensure!(export_csv(&outcome.requests) == exported.stdout.as_bytes(), "export not a fixed point");
    Ok(format!("2 runs byte-identical over {} requests; round-trip exact", requests.len()))
}

// ---- API -------------------------------------------------------------------

fn api_conformance() -> Result<String, String> {
    tokio::runtime::Builder::new_multi_thread()
        .worker_threads(2)
        .enable_all()
        .build()
        .map_err(|e| e.to_string())?
        .block_on(api_checks())
}

async fn api_checks() -> Result<String, String> {
    use axum::body::Body;
    use axum::http::{Method, Request as HttpRequest};
    use http_body_util::BodyExt;
    use tower::ServiceExt;

    let mut requests = fixture_requests();
    let extra = random_requests(&mut rng(3), 80);
    requests.extend(extra.into_iter().map(|mut r| {
        r.issue_id = slatrack_core::IssueId::from_seq(r.issue_id.numeric_suffix() + 5000);
        r
    }));
    let ws = Workspace::with_requests(&requests);
    let mut config = slatrack_api::ServerConfig::new(&ws.store);
    config.matrix_path = ws.matrix.clone();
    config.output_dir = ws.out.clone();
    let app = slatrack_api::router(config).map_err(|e| e.message)?;

    let call = |method: Method, uri: String, body: Option<&str>| {
        let app = app.clone();
        let body = body.map(|b| Body::from(b.to_string())).unwrap_or_else(Body::empty);
        async move {
            let req = HttpRequest::builder()
                .method(method)
                .uri(uri)
                .header("content-type", "application/json")
                .body(body)
                .unwrap();
            let resp = app.oneshot(req).await.unwrap();
            let status = resp.status().as_u16();
            let bytes = resp.into_body().collect().await.unwrap().to_bytes();
            (status, serde_json::from_slice::<Value>(&bytes).unwrap_or(Value::Null))
        }
    };
    let canonical = |v: &Value| serde_json::to_string(v).unwrap();

    let matrix = PriorityMatrix::standard();
    let calendar = WorkCalendar::default();
    let mut compared = 0;
    for d in [1, 4, 7, 10, 15, 28] {
        let as_of = may(d);
        let detailed = build_detailed(&requests, &matrix, &calendar, as_of).map_err(|e| e.to_string())?;
        let overview = build_overview(&detailed);
        let (s, body) = call(Method::GET, format!("/reports/detailed?as_of={as_of}"), None).await;
        ensure!(s == 200, "detailed {as_of}: {s}");
        ensure!(canonical(&body) == canonical(&serde_json::to_value(&detailed).unwrap()), "detailed {as_of} differs");
        let (s, body) = call(Method::GET, format!("/reports/overview?as_of={as_of}"), None).await;
        ensure!(s == 200, "overview {as_of}: {s}");
        ensure!(canonical(&body) == canonical(&serde_json::to_value(&overview).unwrap()), "overview {as_of} differs");
        compared += 2;
    }

    let bad: Vec<(Method, &str, Option<&str>, u16)> = vec![
        (Method::GET, "/reports/detailed?as_of=2014-02-30", None, 422),
        (Method::GET, "/reports/overview?as_of=tomorrow", None, 422),
        (Method::POST, "/files/prepare?as_of=5/10/2014", None, 422),
        (Method::GET, "/requests/R0000", None, 404),
        (Method::GET, "/requests?status=Lost", None, 422),
        (Method::POST, "/requests", Some(r#"{"creation":"2014-05-10","issue_type":"Billing","priority":"Low"}"#), 422),
        (Method::POST, "/requests", Some(r#"{"issue_id":"R1","creation":"2014-05-10","issue_type":"Billing","priority":"Low","subject":"x"}"#), 422),
        (Method::POST, "/requests", Some("[1,2"), 422),
        (Method::PATCH, "/requests/R1240", Some(r#"{"status":"Completed"}"#), 422),
        (Method::PATCH, "/requests/R1240", Some(r#"{"status":"Open"}"#), 409),
        (Method::PATCH, "/requests/R1235", Some(r#"{"status":"Assigned","assignee":"kim"}"#), 409),
        (Method::PATCH, "/requests/R0000", Some(r#"{"priority":"Low"}"#), 404),
        (Method::PUT, "/priority-matrix", Some(r#"{"entries":{"Critical":{"amount":1,"unit":"days"}}}"#), 422),
        (Method::PUT, "/priority-matrix", Some(r#"{"entries":{"Critical":{"amount":0,"unit":"hours"},"High":{"amount":4,"unit":"hours"},"Medium":{"amount":1,"unit":"days"},"Low":{"amount":3,"unit":"days"}}}"#), 422),
        (Method::POST, "/metrics/events", Some(r#"[{"kind":"CallAnswered","at":"2014-05-01T09:00:00"}]"#), 422),
        (Method::GET, "/metrics/desk?tsf_threshold_s=-5", None, 422),
        (Method::POST, "/scheduler/simulate", Some(r#"[{"id":"A","duration_h":1,"deadline_h":1,"priority":1},{"id":"A","duration_h":1,"deadline_h":1,"priority":1}]"#), 422),
        (Method::GET, "/no/such/route", None, 404),
        (Method::DELETE, "/priority-matrix", None, 405),
    ];
    let hashes = || (file_hash(&ws.store), file_hash(&ws.matrix));
    for (method, uri, body, want) in &bad {
        let before = hashes();
        let (s, err) = call(method.clone(), uri.to_string(), *body).await;
        ensure!(s == *want, "{method} {uri}: status {s}, want {want}");
        ensure!(err["status"] == *want && err["code"].is_string(), "{method} {uri}: error body {err}");
        ensure!(hashes() == before, "{method} {uri} changed the store or matrix file");
    }

    let (s, _) = call(Method::POST, "/requests".into(), Some(r#"{"creation":"2014-05-10","issue_type":"Billing","priority":"Low","subject":"ok"}"#)).await;
    ensure!(s == 201, "valid POST returned {s}");
    Ok(format!("{compared} report comparisons; {} rejected calls left files untouched", bad.len()))
}
