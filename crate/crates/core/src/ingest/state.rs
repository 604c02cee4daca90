//! Persistent import bookkeeping.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::{fs, io};

use chrono::{DateTime, NaiveDateTime, Utc};

use crate::fsutil::write_atomic;

pub const STATE_FILE: &str = "import.state";
const STATE_VERSION: u32 = 1;
const CHECKSUM_SECTION: &str = "[checksums]";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RowStats {
    pub parsed: u64,
    pub malformed: u64,
    /// Rows whose action country is absent or not among the configured countries.
    pub out_of_scope: u64,
    pub payloads_imported: u64,
    pub payloads_corrupt: u64,
    pub checksum_failures: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ImportState {
    pub last_imported_timestamp: Option<DateTime<Utc>>,
    pub per_file_checksums: BTreeMap<String, String>,
    pub row_stats: RowStats,
}

#[derive(Debug, thiserror::Error)]
pub enum StateError {
    #[error("import state i/o: {0}")]
    Io(#[from] io::Error),
    #[error("import state line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("unsupported import state version {0}")]
    Version(u32),
}

impl ImportState {
    /// Moves the high-water mark forward; never backwards.
    pub fn advance_to(&mut self, timestamp: DateTime<Utc>) {
        if self.last_imported_timestamp.is_none_or(|last| timestamp > last) {
            self.last_imported_timestamp = Some(timestamp);
        }
    }

    pub fn to_text(&self) -> String {
        let s = &self.row_stats;
        let mut out = String::new();
        let _ = writeln!(out, "version={STATE_VERSION}");
        let stamp = self
            .last_imported_timestamp
            .map(|t| t.format("%Y%m%d%H%M%S").to_string())
            .unwrap_or_default();
        let _ = writeln!(out, "last_imported_timestamp={stamp}");
        for (key, value) in [
            ("rows_parsed", s.parsed),
            ("rows_malformed", s.malformed),
            ("rows_out_of_scope", s.out_of_scope),
            ("payloads_imported", s.payloads_imported),
            ("payloads_corrupt", s.payloads_corrupt),
            ("checksum_failures", s.checksum_failures),
        ] {
            let _ = writeln!(out, "{key}={value}");
        }
        out.push_str(CHECKSUM_SECTION);
        out.push('\n');
        for (url, sum) in &self.per_file_checksums {
            let _ = writeln!(out, "{url}\t{sum}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, StateError> {
        let mut state = ImportState::default();
        let mut in_checksums = false;
        let mut version = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |reason: &str| StateError::Parse { line: line_no, reason: reason.to_string() };
            if raw.trim().is_empty() {
                continue;
            }
            if raw == CHECKSUM_SECTION {
                in_checksums = true;
                continue;
            }
            if in_checksums {
                let (url, sum) = raw.split_once('\t').ok_or_else(|| err("expected url<TAB>checksum"))?;
                state.per_file_checksums.insert(url.to_string(), sum.to_string());
                continue;
            }
            let (key, value) = raw.split_once('=').ok_or_else(|| err("expected key=value"))?;
            let count = || value.parse::<u64>().map_err(|_| err("expected a count"));
            match key {
                "version" => {
                    let v = value.parse::<u32>().map_err(|_| err("bad version"))?;
                    if v != STATE_VERSION {
                        return Err(StateError::Version(v));
                    }
                    version = Some(v);
                }
                "last_imported_timestamp" if value.is_empty() => state.last_imported_timestamp = None,
                "last_imported_timestamp" => {
                    let t = NaiveDateTime::parse_from_str(value, "%Y%m%d%H%M%S")
                        .map_err(|_| err("bad timestamp"))?;
                    state.last_imported_timestamp = Some(t.and_utc());
                }
                "rows_parsed" => state.row_stats.parsed = count()?,
                "rows_malformed" => state.row_stats.malformed = count()?,
                "rows_out_of_scope" => state.row_stats.out_of_scope = count()?,
                "payloads_imported" => state.row_stats.payloads_imported = count()?,
                "payloads_corrupt" => state.row_stats.payloads_corrupt = count()?,
                "checksum_failures" => state.row_stats.checksum_failures = count()?,
                _ => return Err(err(&format!("unknown key {key:?}"))),
            }
        }
        if version.is_none() {
            return Err(StateError::Parse { line: 0, reason: "missing version".into() });
        }
        Ok(state)
    }

    /// Loads `<root>/import.state`, or an empty state when the file does not exist.
    pub fn load(root: &Path) -> Result<Self, StateError> {
        match fs::read_to_string(root.join(STATE_FILE)) {
            Ok(text) => Self::from_text(&text),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Self::default()),
            Err(e) => Err(e.into()),
        }
    }

    pub fn save(&self, root: &Path) -> Result<(), StateError> {
        write_atomic(&root.join(STATE_FILE), self.to_text().as_bytes())?;
        Ok(())
    }
}
