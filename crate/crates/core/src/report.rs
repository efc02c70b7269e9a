//! Detailed and overview SLA reports and the files they are written to.
//!
//! The detailed report has one row per request with its due date, the
//! signed day countdown and its breach state. The overview pivots the open
//! requests of each tracked priority by issue type and counts those due
//! today and those that missed their SLA.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::calendar::WorkCalendar;
use crate::csvio::{self, Columns, REQUEST_COLUMNS};
use crate::error::{Error, Result};
use crate::priority::{Priority, PriorityMatrix};
use crate::request::Request;
use crate::sla::{self, BreachState};
use crate::timestamp::Timestamp;

pub const DUE_IN: &str = "Due In? (Days)";
pub const DUE_DATE: &str = "Due Date";
pub const ALL_OPEN: &str = "All Open Requests";
pub const DUE_TODAY: &str = "Requests Due for Today";
pub const SLA_MISSED: &str = "SLA Missed?";

pub const DEFAULT_OVERVIEW_FILE: &str = "out_file.csv";
pub const DEFAULT_DETAILED_FILE: &str = "out_file_detailed.csv";
pub const SETTINGS_FILE: &str = "sla_settings.txt";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetailedRow {
    #[serde(flatten)]
    pub request: Request,
    pub due_date: Option<Timestamp>,
    pub due_in_days: Option<i64>,
    pub breach: BreachState,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverviewRow {
    pub priority: Priority,
    pub all_open: u64,
    /// Every pivot column of the report, zero-filled.
    pub per_issue_type: BTreeMap<String, u64>,
    pub due_today: u64,
    pub sla_missed: u64,
}

pub fn build_detailed(
    requests: &[Request],
    matrix: &PriorityMatrix,
    calendar: &WorkCalendar,
    as_of: NaiveDate,
) -> Result<Vec<DetailedRow>> {
    requests
        .iter()
        .map(|r| {
            let snap = sla::evaluate(r, matrix, calendar, as_of)?;
            Ok(DetailedRow {
                request: r.clone(),
                due_date: snap.due,
                due_in_days: snap.due_in_days,
                breach: snap.breach,
            })
        })
        .collect()
}

/// Exactly four rows, Critical to Low. Planned rows are left out.
pub fn build_overview(detailed: &[DetailedRow]) -> Vec<OverviewRow> {
    let tracked = |row: &&DetailedRow| !row.request.priority.is_exempt();
    let columns: BTreeSet<&str> = detailed
        .iter()
        .filter(tracked)
        .filter(|row| row.request.status.is_open())
        .map(|row| row.request.issue_type.as_str())
        .collect();

    Priority::TRACKED
        .iter()
        .map(|&priority| {
            let mut out = OverviewRow {
                priority,
                all_open: 0,
                per_issue_type: columns.iter().map(|c| (c.to_string(), 0)).collect(),
                due_today: 0,
                sla_missed: 0,
            };
            for row in detailed.iter().filter(|r| r.request.priority == priority) {
                if row.request.status.is_open() {
                    out.all_open += 1;
                    *out
                        .per_issue_type
                        .get_mut(&row.request.issue_type)
                        .expect("column collected above") += 1;
                }
                if row.breach == BreachState::DueToday {
                    out.due_today += 1;
                }
                if row.breach.is_missed() {
                    out.sla_missed += 1;
                }
            }
            out
        })
        .collect()
}

pub fn detailed_header() -> Vec<&'static str> {
    REQUEST_COLUMNS.iter().copied().chain([DUE_IN, DUE_DATE]).collect()
}

/// Header and cells of the detailed report, exactly as written to CSV.
pub fn detailed_table(rows: &[DetailedRow]) -> (Vec<String>, Vec<Vec<String>>) {
    let header = detailed_header().into_iter().map(String::from).collect();
    let cells = rows
        .iter()
        .map(|row| {
            let mut fields = csvio::request_fields(&row.request).to_vec();
            fields.push(row.due_in_days.map(|d| d.to_string()).unwrap_or_default());
            fields.push(row.due_date.map(|d| d.to_string()).unwrap_or_default());
            fields
        })
        .collect();
    (header, cells)
}

pub fn detailed_csv(rows: &[DetailedRow]) -> Vec<u8> {
    let (header, cells) = detailed_table(rows);
    csvio::table_csv(&header, &cells)
}


/// Reads a detailed CSV back into rows. The assignee is not part of the
/// file and comes back empty; breach states are recomputed from the
/// countdown with the same rule that produced them.
pub fn parse_detailed_csv(bytes: &[u8]) -> Result<Vec<DetailedRow>> {
    let mut rdr = csvio::reader(bytes);
    let headers = rdr.headers().map_err(csvio::csv_err)?.clone();
    let required: Vec<&str> = detailed_header();
    let cols = Columns::locate(&headers, &required)?;
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(csvio::csv_err)?;
        let row_err = |e: Error| Error::Parse(format!("row {}: {e}", i + 1));
        let request = cols.request_fields(&record).map_err(row_err)?;
        request.validate_without_assignee().map_err(row_err)?;
        let due_in_days = cols
            .get(&record, DUE_IN)
            .map(|v| v.trim().parse::<i64>())
            .transpose()
            .map_err(|e| row_err(Error::Parse(format!("bad {DUE_IN}: {e}"))))?;
        let due_date: Option<Timestamp> =
            cols.get(&record, DUE_DATE).map(str::parse).transpose().map_err(row_err)?;
        let breach = match (due_date, due_in_days) {
            (None, None) => BreachState::Exempt,
            (Some(due), Some(days)) => {
                let as_of = shift_days(due.date(), -days).ok_or_else(|| {
                    row_err(Error::Parse(format!("{DUE_IN} {days} out of range")))
                })?;
                sla::classify(request.status, request.completion, Some(due), as_of)
            }
            _ => {
                return Err(row_err(Error::Parse(format!(
                    "'{DUE_IN}' and '{DUE_DATE}' must both be set or both empty"
                ))))
            }
        };
        rows.push(DetailedRow {
            request,
            due_date,
            due_in_days,
            breach,
        });
    }
    Ok(rows)
}

fn shift_days(d: NaiveDate, by: i64) -> Option<NaiveDate> {
    if by >= 0 {
        d.checked_add_days(Days::new(by as u64))
    } else {
        d.checked_sub_days(Days::new(by.unsigned_abs()))
    }
}

/// Pivot columns used by a set of overview rows.
pub fn overview_columns(rows: &[OverviewRow]) -> Vec<String> {
    rows.iter()
        .flat_map(|r| r.per_issue_type.keys().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

pub fn overview_header(columns: &[String]) -> Vec<String> {
    let mut header = vec![crate::csvio::PRIORITY.to_string(), ALL_OPEN.to_string()];
    header.extend(columns.iter().cloned());
    header.push(DUE_TODAY.to_string());
    header.push(SLA_MISSED.to_string());
    header
}

/// Header and cells of the overview, exactly as written to CSV.
pub fn overview_table(rows: &[OverviewRow]) -> (Vec<String>, Vec<Vec<String>>) {
    let columns = overview_columns(rows);
    let cells = rows
        .iter()
        .map(|row| {
            let mut fields = vec![row.priority.to_string(), row.all_open.to_string()];
            fields.extend(
                columns
                    .iter()
                    .map(|c| row.per_issue_type.get(c).copied().unwrap_or(0).to_string()),
            );
            fields.push(row.due_today.to_string());
            fields.push(row.sla_missed.to_string());
            fields
        })
        .collect();
    (overview_header(&columns), cells)
}

pub fn overview_csv(rows: &[OverviewRow]) -> Vec<u8> {
    let (header, cells) = overview_table(rows);
    csvio::table_csv(&header, &cells)
}

/// Where the report pair lives, as recorded for downstream viewers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SettingsFile {
    pub output_dir: PathBuf,
    pub overview_name: String,
    pub detailed_name: String,
}

impl SettingsFile {
    pub fn new(output_dir: impl Into<PathBuf>) -> Self {
        SettingsFile {
            output_dir: output_dir.into(),
            overview_name: DEFAULT_OVERVIEW_FILE.to_string(),
            detailed_name: DEFAULT_DETAILED_FILE.to_string(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for name in [&self.overview_name, &self.detailed_name] {
            if name.len() <= ".csv".len() || !name.ends_with(".csv") {
                return Err(Error::validation(format!(
                    "report file name '{name}' must be non-empty and end in .csv"
                )));
            }
        }
        Ok(())
    }

    pub fn overview_path(&self) -> PathBuf {
        self.output_dir.join(&self.overview_name)
    }

    pub fn detailed_path(&self) -> PathBuf {
        self.output_dir.join(&self.detailed_name)
    }

    pub fn settings_path(&self) -> PathBuf {
        self.output_dir.join(SETTINGS_FILE)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "output_dir={}", self.output_dir.display());
        let _ = writeln!(s, "overview_file={}", self.overview_name);
        let _ = writeln!(s, "detailed_file={}", self.detailed_name);
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut output_dir = None;
        let mut overview = None;
        let mut detailed = None;
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("settings line '{line}' has no '='")))?;
            match key.trim() {
                "output_dir" => output_dir = Some(PathBuf::from(value)),
                "overview_file" => overview = Some(value.to_string()),
                "detailed_file" => detailed = Some(value.to_string()),
                other => return Err(Error::Parse(format!("unknown settings key '{other}'"))),
            }
        }
        let missing = |k: &str| Error::Parse(format!("settings file lacks '{k}'"));
        let settings = SettingsFile {
            output_dir: output_dir.ok_or_else(|| missing("output_dir"))?,
            overview_name: overview.ok_or_else(|| missing("overview_file"))?,
            detailed_name: detailed.ok_or_else(|| missing("detailed_file"))?,
        };
        settings.validate()?;
        Ok(settings)
    }
}

/// Writes the overview CSV, the detailed CSV and the settings file, in that
/// order, and returns their paths. Each file is replaced atomically.
pub fn emit_files(
    overview: &[OverviewRow],
    detailed: &[DetailedRow],
    settings: &SettingsFile,
) -> Result<Vec<PathBuf>> {
    settings.validate()?;
    let dir: &Path = &settings.output_dir;
    if !dir.is_dir() {
        return Err(Error::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "output directory does not exist"),
        ));
    }
    let files = [
        (settings.overview_path(), overview_csv(overview)),
        (settings.detailed_path(), detailed_csv(detailed)),
        (settings.settings_path(), settings.to_text().into_bytes()),
    ];
    let mut written = Vec::with_capacity(files.len());
    for (path, bytes) in files {
        csvio::write_atomic(&path, &bytes)?;
        written.push(path);
    }
    Ok(written)
}
