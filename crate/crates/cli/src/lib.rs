//! `slactl`: the SLA tracker on a local store file, with no server.
//!
//! Data goes to stdout and diagnostics to stderr. Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0    | success |
//! | 1    | validation error (bad input, illegal transition, unknown id, bad rows) |
//! | 2    | I/O error |
//! | 64   | usage error (unknown subcommand, missing or unknown flag) |

mod table;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::error::ErrorKind;
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use slatrack_core::metrics::{self, MetricsReport};
use slatrack_core::report::{self, SettingsFile};
use slatrack_core::scheduler::{self, Comparison};
use slatrack_core::store::{self, Store, StoreLock};
use slatrack_core::{
    csvio, CalendarMode, DetailedRow, Error, IssueId, Priority, PriorityMatrix, Request,
    RequestUpdate, Result, SlaDuration, SlaPolicy, Status, Timestamp,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// Where the CLI reads and writes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliConfig {
    pub store_path: PathBuf,
    pub output_dir: PathBuf,
    pub matrix_path: PathBuf,
    pub as_of: Option<NaiveDate>,
}

impl CliConfig {
    pub fn validate(&self) -> Result<()> {
        for (flag, path) in [
            ("--store", &self.store_path),
            ("--out-dir", &self.output_dir),
            ("--matrix", &self.matrix_path),
        ] {
            if path.as_os_str().is_empty() {
                return Err(Error::Validation(format!("{flag} must not be empty")));
            }
        }
        Ok(())
    }

    fn as_of(&self) -> NaiveDate {
        self.as_of.unwrap_or_else(|| chrono::Local::now().date_naive())
    }
}

#[derive(Debug, Parser)]
#[command(name = "slactl", version, about = "Track service requests against their SLA")]
#[command(args_override_self = true)]
struct Cli {
    /// Request store (CSV).
    #[arg(long, global = true, default_value = "requests.csv")]
    store: PathBuf,
    /// Directory for prepare-sla-file output.
    #[arg(long = "out-dir", global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Report date (YYYY-MM-DD); defaults to today.
    #[arg(long = "as-of", global = true, value_parser = parse_iso_date)]
    as_of: Option<NaiveDate>,
    /// Priority matrix and calendar (JSON).
    #[arg(long, global = true, default_value = "sla_matrix.json")]
    matrix: PathBuf,
    #[command(subcommand)]
    command: Command,
}

fn parse_iso_date(s: &str) -> std::result::Result<NaiveDate, String> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|_| format!("expected YYYY-MM-DD, got '{s}'"))
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load a request sheet; rows whose id is already stored replace it.
    Import { file: PathBuf },
    /// Write the store as a request sheet.
    Export {
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Register a new Open request under the next free id.
    Add(AddArgs),
    /// Step a request along its lifecycle, or change its priority or assignee.
    Update(UpdateArgs),
    /// Change the priority matrix.
    SetMatrix(SetMatrixArgs),
    /// Print the priority matrix and working calendar.
    ShowMatrix {
        #[arg(long, value_enum, default_value_t)]
        format: MatrixFormat,
    },
    /// Show every request with its due date and countdown.
    CalcSla {
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Write the overview, detailed and settings files into --out-dir.
    PrepareSlaFile,
    /// Per-priority overview or per-request detailed report.
    Report(ReportArgs),
    /// Desk KPIs from an event log (CSV: kind,at,case_id,answer_delay_s).
    Metrics(MetricsArgs),
    /// Priority-only against earliest-deadline-first on a job list
    /// (CSV: id,duration_h,deadline_h,priority).
    Simulate {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
enum Format {
    #[default]
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
enum MatrixFormat {
    #[default]
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Preset {
    Standard,
    Hourly,
}

#[derive(Debug, Args)]
struct AddArgs {
    #[arg(long = "type")]
    issue_type: String,
    #[arg(long)]
    priority: Priority,
    #[arg(long)]
    subject: String,
    /// Creation date or date-time; defaults to --as-of, else today.
    #[arg(long)]
    created: Option<Timestamp>,
}

#[derive(Debug, Args)]
struct UpdateArgs {
    id: String,
    #[arg(long)]
    status: Option<Status>,
    /// Completion date, with --status completed.
    #[arg(long)]
    completion: Option<Timestamp>,
    #[arg(long)]
    assignee: Option<String>,
    #[arg(long)]
    priority: Option<Priority>,
}

#[derive(Debug, Args)]
struct SetMatrixArgs {
    /// Start from this policy or bare matrix file instead of the current one.
    #[arg(long, conflicts_with = "preset")]
    from_file: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Allowance such as 1d or 4h.
    #[arg(long)]
    critical: Option<SlaDuration>,
    #[arg(long)]
    high: Option<SlaDuration>,
    #[arg(long)]
    medium: Option<SlaDuration>,
    #[arg(long)]
    low: Option<SlaDuration>,
    /// calendar or business.
    #[arg(long)]
    calendar_mode: Option<CalendarMode>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("view").required(true).args(["overview", "detailed"])))]
struct ReportArgs {
    #[arg(long)]
    overview: bool,
    #[arg(long)]
    detailed: bool,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    events: PathBuf,
    #[arg(long = "tsf-threshold", default_value_t = 20.0)]
    tsf_threshold: f64,
    /// Start of the MTTR/uptime window; defaults to the first event.
    #[arg(long, requires = "to")]
    from: Option<Timestamp>,
    #[arg(long, requires = "from")]
    to: Option<Timestamp>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    return EXIT_OK;
                }
                ErrorKind::ValueValidation => EXIT_VALIDATION,
                _ => EXIT_USAGE,
            };
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    let config = CliConfig {
        store_path: cli.store,
        output_dir: cli.out_dir,
        matrix_path: cli.matrix,
        as_of: cli.as_of,
    };
    match config.validate().and_then(|_| execute(&config, cli.command, out, err)) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "slactl: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } => EXIT_IO,
        _ => EXIT_VALIDATION,
    }
}

fn stdout_err(e: std::io::Error) -> Error {
    Error::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    }
}

fn emit(out: &mut dyn Write, bytes: &[u8]) -> Result<()> {
    out.write_all(bytes).map_err(stdout_err)
}

fn line(out: &mut dyn Write, text: impl std::fmt::Display) -> Result<()> {
    writeln!(out, "{text}").map_err(stdout_err)
}

fn read_input(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn json<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("report serializes");
    bytes.push(b'\n');
    bytes
}

fn read_store(path: &Path) -> Result<Store> {
    let _lock = StoreLock::shared(path)?;
    Store::open(path)
}

fn with_store<T>(path: &Path, f: impl FnOnce(&mut Store) -> Result<T>) -> Result<T> {
    let lock = StoreLock::exclusive(path)?;
    let mut store = Store::open(path)?;
    let out = f(&mut store)?;
    store.save(&lock)?;
    Ok(out)
}

/// The detailed rows for the whole store as of the configured date.
pub fn detailed_rows(config: &CliConfig) -> Result<Vec<DetailedRow>> {
    let store = read_store(&config.store_path)?;
    let policy = SlaPolicy::load(&config.matrix_path)?;
    report::build_detailed(
        store.requests(),
        &policy.matrix,
        &policy.calendar,
        config.as_of(),
    )
}

fn execute(config: &CliConfig, command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Import { file } => import(config, &file, out, err),
        Command::Export { output } => {
            let store = read_store(&config.store_path)?;
            let bytes = store::export_csv(store.requests());
            match output {
                Some(path) => {
                    csvio::write_atomic(&path, &bytes)?;
                    line(out, path.display())?;
                }
                None => emit(out, &bytes)?,
            }
            Ok(EXIT_OK)
        }
        Command::Add(args) => add(config, args, out),
        Command::Update(args) => {
            let update = RequestUpdate {
                status: args.status,
                completion: args.completion,
                assignee: args.assignee,
                priority: args.priority,
            };
            let next = with_store(&config.store_path, |store| {
                let next = store.get(&args.id)?.apply(update)?;
                store.upsert(next.clone())?;
                Ok(next)
            })?;
            line(out, format!("{} {} {}", next.issue_id, next.status, next.priority))?;
            Ok(EXIT_OK)
        }
        Command::SetMatrix(args) => set_matrix(config, args, out),
        Command::ShowMatrix { format } => {
            let policy = SlaPolicy::load(&config.matrix_path)?;
            match format {
                MatrixFormat::Table => emit(out, matrix_table(&policy).as_bytes())?,
                MatrixFormat::Json => emit(out, &policy.to_json())?,
            }
            Ok(EXIT_OK)
        }
        Command::CalcSla { format } => {
            emit(out, &detailed_output(&detailed_rows(config)?, format))?;
            Ok(EXIT_OK)
        }
        Command::PrepareSlaFile => {
            let detailed = detailed_rows(config)?;
            let overview = report::build_overview(&detailed);
            let settings = SettingsFile::new(&config.output_dir);
            for path in report::emit_files(&overview, &detailed, &settings)? {
                line(out, path.display())?;
            }
            Ok(EXIT_OK)
        }
        Command::Report(args) => {
            let detailed = detailed_rows(config)?;
            let bytes = if args.detailed {
                detailed_output(&detailed, args.format)
            } else {
                let overview = report::build_overview(&detailed);
                match args.format {
                    Format::Table => {
                        let (header, cells) = report::overview_table(&overview);
                        table::render(&header, &cells).into_bytes()
                    }
                    Format::Csv => report::overview_csv(&overview),
                    Format::Json => json(&overview),
                }
            };
            emit(out, &bytes)?;
            Ok(EXIT_OK)
        }
        Command::Metrics(args) => {
            let events = metrics::parse_events_csv(&read_input(&args.events)?)?;
            let window = args.from.zip(args.to).map(|(f, t)| (f.to_datetime(), t.to_datetime()));
            let report = MetricsReport::compute(&events, args.tsf_threshold, window)?;
            emit(out, &metrics_output(&report, args.format))?;
            Ok(EXIT_OK)
        }
        Command::Simulate { file, format } => {
            let jobs = scheduler::parse_jobs_csv(&read_input(&file)?)?;
            let comparison = scheduler::compare(&jobs)?;
            let bytes = match format {
                Format::Csv => comparison.to_csv(&jobs),
                Format::Json => json(&comparison),
                Format::Table => simulation_table(&comparison, &jobs),
            };
            emit(out, &bytes)?;
            Ok(EXIT_OK)
        }
    }
}

fn import(config: &CliConfig, file: &Path, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let outcome = store::import_csv(&read_input(file)?)?;
    let imported = outcome.requests.len();
    with_store(&config.store_path, |store| {
        for r in outcome.requests {
            store.upsert(r)?;
        }
        Ok(())
    })?;
    for e in &outcome.errors {
        let id = e.issue_id.as_deref().map(|id| format!(" ({id})")).unwrap_or_default();
        let _ = writeln!(err, "slactl: row {}{id}: {}", e.row, e.reason);
    }
    line(
        out,
        format!(
            "imported {imported} request(s), rejected {} row(s)",
            outcome.errors.len()
        ),
    )?;
    Ok(if outcome.errors.is_empty() {
        EXIT_OK
    } else {
        EXIT_VALIDATION
    })
}

fn add(config: &CliConfig, args: AddArgs, out: &mut dyn Write) -> Result<i32> {
    if args.subject.trim().is_empty() {
        return Err(Error::Validation("subject is empty".into()));
    }
    let creation = args.created.unwrap_or(Timestamp::Date(config.as_of()));
    let request = with_store(&config.store_path, |store| {
        let id: IssueId = store.allocate_id();
        let r = Request::open(id, creation, args.issue_type.trim(), args.priority, args.subject);
        store.upsert(r.clone())?;
        Ok(r)
    })?;
    line(out, request.issue_id)?;
    Ok(EXIT_OK)
}

fn set_matrix(config: &CliConfig, args: SetMatrixArgs, out: &mut dyn Write) -> Result<i32> {
    let overrides = [
        (Priority::Critical, args.critical),
        (Priority::High, args.high),
        (Priority::Medium, args.medium),
        (Priority::Low, args.low),
    ];
    let untouched = args.from_file.is_none()
        && args.preset.is_none()
        && args.calendar_mode.is_none()
        && overrides.iter().all(|(_, d)| d.is_none());
    if untouched {
        return Err(Error::Validation(
            "nothing to change; give --preset, --from-file, a priority or --calendar-mode".into(),
        ));
    }
    let mut policy = SlaPolicy::load(&config.matrix_path)?;
    if let Some(path) = &args.from_file {
        policy = SlaPolicy::from_json(&read_input(path)?)?;
    }
    match args.preset {
        Some(Preset::Standard) => policy.matrix = PriorityMatrix::standard(),
        Some(Preset::Hourly) => policy.matrix = PriorityMatrix::hourly(),
        None => {}
    }
    let mut matrix = policy.matrix.clone();
    for (p, d) in overrides {
        if let Some(d) = d {
            matrix = matrix.with_entry(p, d)?;
        }
    }
    if let Some(mode) = args.calendar_mode {
        matrix = matrix.with_calendar_mode(mode);
    }
    policy.matrix = matrix;
    policy.save(&config.matrix_path)?;
    emit(out, matrix_table(&policy).as_bytes())?;
    Ok(EXIT_OK)
}

fn matrix_table(policy: &SlaPolicy) -> String {
    let rows: Vec<Vec<String>> = Priority::ALL
        .iter()
        .map(|p| {
            let sla = match policy.matrix.entries().get(p) {
                Some(d) => d.to_string(),
                None => "exempt".to_string(),
            };
            vec![p.to_string(), sla]
        })
        .collect();
    let mut text = table::render(&["Priority".to_string(), "SLA".to_string()], &rows);
    let mode = match policy.matrix.calendar_mode() {
        CalendarMode::CalendarDays => "calendar days",
        CalendarMode::BusinessDays => "business days",
    };
    let weekdays: Vec<String> = policy
        .calendar
        .working_weekdays()
        .iter()
        .map(|d| d.to_string())
        .collect();
    text.push_str(&format!(
        "\ncounting: {mode}\nworking days: {}\nholidays: {}\n",
        weekdays.join(" "),
        policy.calendar.holidays().len()
    ));
    text
}

const BREACH_COLUMN: &str = "SLA State";

fn detailed_output(rows: &[DetailedRow], format: Format) -> Vec<u8> {
    match format {
        Format::Csv => report::detailed_csv(rows),
        Format::Json => json(&rows),
        Format::Table => {
            let (mut header, mut cells) = report::detailed_table(rows);
            header.push(BREACH_COLUMN.to_string());
            for (fields, row) in cells.iter_mut().zip(rows) {
                fields.push(format!("{:?}", row.breach));
            }
            table::render(&header, &cells).into_bytes()
        }
    }
}

fn metrics_output(report: &MetricsReport, format: Format) -> Vec<u8> {
    if format == Format::Json {
        return json(report);
    }
    let show = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    let rows = vec![
        vec!["aba_pct".to_string(), show(report.aba_pct)],
        vec!["asa_s".to_string(), show(report.asa_s)],
        vec!["tsf_pct".to_string(), show(report.tsf_pct)],
        vec!["tsf_threshold_s".to_string(), report.tsf_threshold_s.to_string()],
        vec!["fcr_pct".to_string(), show(report.fcr_pct)],
        vec!["mttr_s".to_string(), show(report.mttr_s)],
        vec!["uptime_pct".to_string(), show(report.uptime_pct)],
    ];
    let header = ["metric".to_string(), "value".to_string()];
    match format {
        Format::Csv => csvio::table_csv(&header, &rows),
        _ => table::render(&header, &rows).into_bytes(),
    }
}

fn simulation_table(c: &Comparison, jobs: &[scheduler::Job]) -> Vec<u8> {
    let header: Vec<String> = [
        "Job",
        "Priority",
        "Deadline (h)",
        "Priority-only finish (h)",
        "EDF finish (h)",
        "Delta (h)",
    ]
    .map(String::from)
    .to_vec();
    let mark = |missed: bool| if missed { " MISSED" } else { "" };
    let rows: Vec<Vec<String>> = jobs
        .iter()
        .zip(&c.deltas)
        .map(|(j, d)| {
            vec![
                j.id.clone(),
                j.priority.to_string(),
                j.deadline_h.to_string(),
                format!("{}{}", d.priority_only_finish_h, mark(c.priority_only.missed.contains(&j.id))),
                format!("{}{}", d.edf_finish_h, mark(c.edf.missed.contains(&j.id))),
                d.delta_h.to_string(),
            ]
        })
        .collect();
    let mut text = table::render(&header, &rows);
    text.push_str(&format!(
        "\npriority-only order: {} ({} missed)\nEDF order: {} ({} missed)\n",
        c.priority_only.order.join(" "),
        c.priority_only_missed,
        c.edf.order.join(" "),
        c.edf_missed
    ));
    text.into_bytes()
}
