//! CSV plumbing shared by the request store and the report files.

use std::fs;
use std::io::Write;
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, WriterBuilder};

use crate::error::{Error, Result};
use crate::request::Request;

pub const ISSUE_ID: &str = "Issue ID";
pub const CREATION_DATE: &str = "Creation Date";
pub const ISSUE_TYPE: &str = "Issue Type";
pub const PRIORITY: &str = "Priority";
pub const SUBJECT: &str = "Subject";
pub const STATUS: &str = "Status";
pub const COMPLETION_DATE: &str = "Completion Date";
pub const ASSIGNEE: &str = "Assignee";

/// Request columns in the order the request sheet shows them.
pub const REQUEST_COLUMNS: [&str; 7] = [
    ISSUE_ID,
    CREATION_DATE,
    ISSUE_TYPE,
    PRIORITY,
    SUBJECT,
    STATUS,
    COMPLETION_DATE,
];

pub(crate) fn writer(buf: &mut Vec<u8>) -> csv::Writer<&mut Vec<u8>> {
    WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(buf)
}

pub(crate) fn reader(bytes: &[u8]) -> csv::Reader<&[u8]> {
    ReaderBuilder::new().flexible(true).trim(csv::Trim::Headers).from_reader(bytes)
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

pub(crate) fn request_fields(r: &Request) -> [String; 7] {
    [
        r.issue_id.to_string(),
        r.creation.to_string(),
        r.issue_type.clone(),
        r.priority.to_string(),
        r.subject.clone(),
        r.status.to_string(),
        r.completion.map(|c| c.to_string()).unwrap_or_default(),
    ]
}

/// Column positions resolved from a header row by case-insensitive name.
pub(crate) struct Columns {
    names: Vec<String>,
}

impl Columns {
    pub fn locate(headers: &StringRecord, required: &[&str]) -> Result<Self> {
        let names: Vec<String> = headers.iter().map(|h| h.trim().to_ascii_lowercase()).collect();
        let missing: Vec<&str> = required
            .iter()
            .copied()
            .filter(|c| !names.iter().any(|n| n.eq_ignore_ascii_case(c)))
            .collect();
        if !missing.is_empty() {
            return Err(Error::Parse(format!(
                "header is missing column(s): {}",
                missing.join(", ")
            )));
        }
        Ok(Columns { names })
    }

    pub fn get<'r>(&self, record: &'r StringRecord, column: &str) -> Option<&'r str> {
        let idx = self.names.iter().position(|n| n.eq_ignore_ascii_case(column))?;
        record.get(idx).filter(|v| !v.is_empty())
    }

    fn require<'r>(&self, record: &'r StringRecord, column: &str) -> Result<&'r str> {
        self.get(record, column)
            .ok_or_else(|| Error::validation(format!("'{column}' is empty")))
    }

    /// Reads the request columns of one row. Assignee is optional.
    pub fn request(&self, record: &StringRecord) -> Result<Request> {
        let request = self.request_fields(record)?;
        request.validate()?;
        Ok(request)
    }

    pub fn request_fields(&self, record: &StringRecord) -> Result<Request> {
        let optional_ts = |col| self.get(record, col).map(str::parse).transpose();
        let request = Request {
            issue_id: self.require(record, ISSUE_ID)?.parse()?,
            creation: self.require(record, CREATION_DATE)?.parse()?,
            issue_type: self.require(record, ISSUE_TYPE)?.to_string(),
            priority: self.require(record, PRIORITY)?.parse()?,
            subject: self.get(record, SUBJECT).unwrap_or_default().to_string(),
            status: self.require(record, STATUS)?.parse()?,
            completion: optional_ts(COMPLETION_DATE)?,
            assignee: self.get(record, ASSIGNEE).map(str::to_string),
        };
        Ok(request)
    }
}

/// Writes `bytes` to `path` via a temp file in the same directory and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    write_atomic_with(path, bytes, || Ok(()))
}

/// `before_rename` runs after the temp file is durable; an error from it
/// abandons the write and leaves `path` untouched.
pub(crate) fn write_atomic_with(
    path: &Path,
    bytes: &[u8],
    before_rename: impl FnOnce() -> std::io::Result<()>,
) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::Builder::new()
        .prefix(".slatrack-")
        .tempfile_in(dir)
        .map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(tmp.path(), e))?;
    before_rename().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub(crate) fn read_file(path: &Path) -> Result<Option<Vec<u8>>> {
    match fs::read(path) {
        Ok(b) => Ok(Some(b)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(Error::io(path, e)),
    }
}

/// A header and rows as CSV bytes in the crate's dialect.
pub fn table_csv(header: &[String], cells: &[Vec<String>]) -> Vec<u8> {
    let mut buf = Vec::new();
    {
        let mut w = writer(&mut buf);
        w.write_record(header).expect("write to Vec");
        for fields in cells {
            w.write_record(fields).expect("write to Vec");
        }
        w.flush().expect("flush Vec");
    }
    buf
}
