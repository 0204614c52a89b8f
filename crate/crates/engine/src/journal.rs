//! Append-only JSON-lines journal of accepted commands.
//!
//! Each line is `{"at_ms": <u64>, "command": {...}}`. Rejected commands are
//! never written, and an activation that hands out no jobs is not written
//! either.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::state::Command;
use crate::EngineError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub at_ms: u64,
    pub command: Command,
}

#[derive(Debug)]
pub struct Journal {
    path: PathBuf,
    file: File,
}

impl Journal {
    /// Opens `path` for appending, creating it if needed, and returns the
    /// records already present.
    pub fn open(path: impl AsRef<Path>) -> Result<(Self, Vec<Record>), EngineError> {
        let path = path.as_ref().to_path_buf();
        let io = |e: std::io::Error| EngineError::Journal(format!("{}: {e}", path.display()));
        let mut records = Vec::new();
        if path.exists() {
            let reader = BufReader::new(File::open(&path).map_err(io)?);
            for (i, line) in reader.lines().enumerate() {
                let line = line.map_err(io)?;
                if line.trim().is_empty() {
                    continue;
                }
                let record = serde_json::from_str(&line).map_err(|e| EngineError::Replay {
                    line: i + 1,
                    message: e.to_string(),
                })?;
                records.push(record);
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(io)?;
        Ok((Self { path, file }, records))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&mut self, record: &Record) -> Result<(), EngineError> {
        let mut line = serde_json::to_vec(record).map_err(|e| EngineError::Journal(e.to_string()))?;
        line.push(b'\n');
        self.file
            .write_all(&line)
            .and_then(|_| self.file.flush())
            .map_err(|e| EngineError::Journal(format!("{}: {e}", self.path.display())))
    }
}
