//! File-backed request repository.
//!
//! The store file is the request sheet CSV (plus an `Assignee` column) with
//! one metadata line, `#next_seq=<n>`, right after the header. Writes go to a
//! temp file that is renamed over the store, and writers serialize through an
//! advisory lock on `<store>.lock`.

use std::fs::{File, OpenOptions};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::csvio::{self, Columns, ASSIGNEE, ISSUE_ID, REQUEST_COLUMNS};
use crate::error::{Error, Result};
use crate::priority::Priority;
use crate::request::{IssueId, Request, Status};

const META_PREFIX: &str = "#next_seq=";

pub fn lock_path(store: &Path) -> PathBuf {
    let mut name = store.as_os_str().to_owned();
    name.push(".lock");
    PathBuf::from(name)
}

/// Held advisory lock on a store. Released on drop.
#[derive(Debug)]
pub struct StoreLock {
    store: PathBuf,
    _file: File,
}

impl StoreLock {
    fn acquire(store: &Path, exclusive: bool) -> Result<Self> {
        let path = lock_path(store);
        let file = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        let locked = if exclusive {
            file.lock()
        } else {
            file.lock_shared()
        };
        locked.map_err(|e| Error::io(&path, e))?;
        Ok(StoreLock {
            store: store.to_path_buf(),
            _file: file,
        })
    }

    /// Blocks until no other reader or writer holds the store.
    pub fn exclusive(store: &Path) -> Result<Self> {
        Self::acquire(store, true)
    }

    pub fn shared(store: &Path) -> Result<Self> {
        Self::acquire(store, false)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RequestFilter {
    pub status: Option<Status>,
    pub priority: Option<Priority>,
    pub issue_type: Option<String>,
}

impl RequestFilter {
    pub fn matches(&self, r: &Request) -> bool {
        self.status.is_none_or(|s| s == r.status)
            && self.priority.is_none_or(|p| p == r.priority)
            && self.issue_type.as_deref().is_none_or(|t| t == r.issue_type)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowError {
    /// 1-based data row, not counting the header or metadata lines.
    pub row: usize,
    pub issue_id: Option<String>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ImportOutcome {
    pub requests: Vec<Request>,
    pub errors: Vec<RowError>,
}

/// Splits off the `#next_seq=` line if it directly follows the header.
fn split_meta(bytes: &[u8]) -> Result<(Option<u64>, Vec<u8>)> {
    let Some(header_end) = bytes.iter().position(|b| *b == b'\n') else {
        return Ok((None, bytes.to_vec()));
    };
    let rest = &bytes[header_end + 1..];
    let line_end = rest.iter().position(|b| *b == b'\n').unwrap_or(rest.len());
    let line = String::from_utf8_lossy(&rest[..line_end]);
    let Some(value) = line.trim_end_matches('\r').strip_prefix(META_PREFIX) else {
        return Ok((None, bytes.to_vec()));
    };
    let seq = value
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad metadata line '{line}'")))?;
    let mut body = bytes[..=header_end].to_vec();
    body.extend_from_slice(rest.get(line_end + 1..).unwrap_or_default());
    Ok((Some(seq), body))
}

/// Reads the request sheet. Rows that fail validation or repeat an earlier
/// id are reported with their row number; all other rows are returned.
pub fn import_csv(bytes: &[u8]) -> Result<ImportOutcome> {
    let (_, body) = split_meta(bytes)?;
    let mut rdr = csvio::reader(&body);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse(format!("unreadable header: {e}")))?
        .clone();
    if headers.iter().all(|h| h.is_empty()) {
        return Err(Error::Parse("unreadable header: file is empty".into()));
    }
    let cols = Columns::locate(&headers, &REQUEST_COLUMNS)?;

    let mut out = ImportOutcome::default();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                out.errors.push(RowError {
                    row,
                    issue_id: None,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let issue_id = cols.get(&record, ISSUE_ID).map(|s| s.trim().to_string());
        let parsed = cols.request(&record).and_then(|r| {
            if out.requests.iter().any(|seen| seen.issue_id == r.issue_id) {
                Err(Error::validation(format!("duplicate issue id {}", r.issue_id)))
            } else {
                Ok(r)
            }
        });
        match parsed {
            Ok(r) => out.requests.push(r),
            Err(e) => out.errors.push(RowError {
                row,
                issue_id,
                reason: e.to_string(),
            }),
        }
    }
    Ok(out)
}

pub fn store_header() -> Vec<&'static str> {
    REQUEST_COLUMNS.iter().copied().chain([ASSIGNEE]).collect()
}

fn write_rows(requests: &[Request], next_seq: Option<u64>) -> Vec<u8> {
    let mut buf = Vec::new();
    {
        let mut w = csvio::writer(&mut buf);
        w.write_record(store_header()).expect("write to Vec");
        w.flush().expect("flush Vec");
    }
    if let Some(seq) = next_seq {
        buf.extend_from_slice(format!("{META_PREFIX}{seq}\n").as_bytes());
    }
    {
        let mut w = csvio::writer(&mut buf);
        for r in requests {
            let mut fields = csvio::request_fields(r).to_vec();
            fields.push(r.assignee.clone().unwrap_or_default());
            w.write_record(&fields).expect("write to Vec");
        }
        w.flush().expect("flush Vec");
    }
    buf
}

/// Request sheet export: the store dialect without the metadata line.
pub fn export_csv(requests: &[Request]) -> Vec<u8> {
    write_rows(requests, None)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Store {
    path: PathBuf,
    requests: Vec<Request>,
    next_seq: u64,
}

impl Store {
    pub fn empty(path: impl Into<PathBuf>) -> Self {
        Store {
            path: path.into(),
            requests: Vec::new(),
            next_seq: 1,
        }
    }

    /// Loads the store, or starts an empty one if the file does not exist.
    pub fn open(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        match csvio::read_file(&path)? {
            Some(bytes) => Self::from_bytes(path, &bytes),
            None => Ok(Self::empty(path)),
        }
    }

    pub fn from_bytes(path: impl Into<PathBuf>, bytes: &[u8]) -> Result<Self> {
        let path = path.into();
        let (meta, _) = split_meta(bytes)?;
        let outcome = import_csv(bytes)?;
        if let Some(first) = outcome.errors.first() {
            return Err(Error::Parse(format!(
                "{}: row {}: {} ({} bad row(s))",
                path.display(),
                first.row,
                first.reason,
                outcome.errors.len()
            )));
        }
        let mut store = Store {
            path,
            requests: Vec::new(),
            next_seq: meta.unwrap_or(1).max(1),
        };
        for r in outcome.requests {
            store.bump_seq(&r.issue_id);
            store.requests.push(r);
        }
        Ok(store)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        write_rows(&self.requests, Some(self.next_seq))
    }

    /// Persists under a held exclusive lock for this store.
    pub fn save(&self, lock: &StoreLock) -> Result<()> {
        self.save_with(lock, || Ok(()))
    }

    pub(crate) fn save_with(
        &self,
        lock: &StoreLock,
        before_rename: impl FnOnce() -> std::io::Result<()>,
    ) -> Result<()> {
        if lock.store != self.path {
            return Err(Error::validation(format!(
                "lock is for {}, not {}",
                lock.store.display(),
                self.path.display()
            )));
        }
        csvio::write_atomic_with(&self.path, &self.to_bytes(), before_rename)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn requests(&self) -> &[Request] {
        &self.requests
    }

    pub fn next_seq(&self) -> u64 {
        self.next_seq
    }

    fn bump_seq(&mut self, id: &IssueId) {
        self.next_seq = self.next_seq.max(id.numeric_suffix().saturating_add(1));
    }

    pub fn allocate_id(&mut self) -> IssueId {
        loop {
            let id = IssueId::from_seq(self.next_seq);
            self.next_seq += 1;
            if !self.requests.iter().any(|r| r.issue_id == id) {
                return id;
            }
        }
    }

    /// Replaces the request with the same id in place, or appends it.
    pub fn upsert(&mut self, request: Request) -> Result<()> {
        request.validate()?;
        self.bump_seq(&request.issue_id);
        match self.requests.iter_mut().find(|r| r.issue_id == request.issue_id) {
            Some(slot) => *slot = request,
            None => self.requests.push(request),
        }
        Ok(())
    }

    pub fn get(&self, id: &str) -> Result<&Request> {
        self.requests
            .iter()
            .find(|r| r.issue_id.as_str() == id)
            .ok_or_else(|| Error::NotFound(format!("request {id}")))
    }

    pub fn list(&self, filter: &RequestFilter) -> Vec<&Request> {
        self.requests.iter().filter(|r| filter.matches(r)).collect()
    }

    pub fn delete(&mut self, id: &str) -> Result<Request> {
        let idx = self
            .requests
            .iter()
            .position(|r| r.issue_id.as_str() == id)
            .ok_or_else(|| Error::NotFound(format!("request {id}")))?;
        Ok(self.requests.remove(idx))
    }
}
