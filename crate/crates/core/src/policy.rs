//! On-disk SLA policy: the priority matrix plus the working calendar.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::calendar::WorkCalendar;
use crate::csvio;
use crate::error::{Error, Result};
use crate::priority::PriorityMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SlaPolicy {
    pub matrix: PriorityMatrix,
    #[serde(default)]
    pub calendar: WorkCalendar,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PolicyFile {
    Full(SlaPolicy),
    MatrixOnly(PriorityMatrix),
}

impl SlaPolicy {
    /// Accepts either `{"matrix": .., "calendar": ..}` or a bare matrix.
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let file: PolicyFile = serde_json::from_slice(bytes).map_err(|e| {
            // untagged hides the cause; retry the full form for a useful message
            match serde_json::from_slice::<SlaPolicy>(bytes) {
                Err(full) => Error::Validation(format!("invalid policy file: {full}")),
                Ok(_) => Error::Validation(format!("invalid policy file: {e}")),
            }
        })?;
        Ok(match file {
            PolicyFile::Full(p) => p,
            PolicyFile::MatrixOnly(matrix) => SlaPolicy {
                matrix,
                calendar: WorkCalendar::default(),
            },
        })
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("policy serializes");
        out.push(b'\n');
        out
    }

    /// The standard policy when the file does not exist.
    pub fn load(path: &Path) -> Result<Self> {
        match csvio::read_file(path)? {
            Some(bytes) => Self::from_json(&bytes),
            None => Ok(SlaPolicy::default()),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        csvio::write_atomic(path, &self.to_json())
    }
}
