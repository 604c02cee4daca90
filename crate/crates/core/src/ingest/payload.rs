//! Unpacking of zipped export payloads.

use std::io::{Cursor, Read};

use md5::{Digest, Md5};

use super::index::PayloadRef;
use super::row::{parse_event_row, EventRecord};
use super::state::ImportState;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PayloadError {
    #[error("corrupt archive: {0}")]
    CorruptArchive(String),
    #[error("checksum mismatch: expected {expected}, got {actual}")]
    ChecksumMismatch { expected: String, actual: String },
}

/// Records parsed from one payload plus its line accounting.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PayloadBatch {
    pub records: Vec<EventRecord>,
    /// Non-empty lines seen in the member file.
    pub lines: usize,
    pub malformed: usize,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ImportOptions {
    pub verify_checksums: bool,
}

pub fn md5_hex(bytes: &[u8]) -> String {
    let digest = Md5::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Parses every row of the single tab-delimited member of `archive`.
/// Invalid UTF-8 is replaced, not rejected.
pub fn decode_payload(archive: &[u8]) -> Result<PayloadBatch, PayloadError> {
    let mut zip = zip::ZipArchive::new(Cursor::new(archive))
        .map_err(|e| PayloadError::CorruptArchive(e.to_string()))?;
    if zip.len() != 1 {
        return Err(PayloadError::CorruptArchive(format!("expected one member, found {}", zip.len())));
    }
    let mut member = zip.by_index(0).map_err(|e| PayloadError::CorruptArchive(e.to_string()))?;
    let mut raw = Vec::with_capacity(member.size() as usize);
    member
        .read_to_end(&mut raw)
        .map_err(|e| PayloadError::CorruptArchive(e.to_string()))?;
    Ok(parse_rows(&String::from_utf8_lossy(&raw)))
}

/// Parses newline-separated export rows; blank lines are ignored.
pub fn parse_rows(text: &str) -> PayloadBatch {
    let mut batch = PayloadBatch::default();
    for line in text.split('\n') {
        if line.is_empty() || line == "\r" {
            continue;
        }
        batch.lines += 1;
        match parse_event_row(line) {
            Ok(record) => batch.records.push(record),
            Err(_) => batch.malformed += 1,
        }
    }
    batch
}

fn check(archive: &[u8], payload: &PayloadRef, opts: ImportOptions) -> Result<PayloadBatch, PayloadError> {
    if opts.verify_checksums {
        let actual = md5_hex(archive);
        if !actual.eq_ignore_ascii_case(&payload.checksum) {
            return Err(PayloadError::ChecksumMismatch { expected: payload.checksum.clone(), actual });
        }
    }
    decode_payload(archive)
}

impl ImportState {
    /// Folds the outcome of one payload into the state. Failed payloads are
    /// counted but do not move the timestamp.
    pub fn apply_payload(&mut self, payload: &PayloadRef, outcome: &Result<PayloadBatch, PayloadError>) {
        match outcome {
            Ok(batch) => {
                self.row_stats.parsed += batch.records.len() as u64;
                self.row_stats.malformed += batch.malformed as u64;
                self.row_stats.payloads_imported += 1;
                self.per_file_checksums.insert(payload.url.clone(), payload.checksum.clone());
                self.advance_to(payload.timestamp);
            }
            Err(PayloadError::CorruptArchive(_)) => self.row_stats.payloads_corrupt += 1,
            Err(PayloadError::ChecksumMismatch { .. }) => self.row_stats.checksum_failures += 1,
        }
    }
}

/// Decodes one payload and records it in `state`.
pub fn import_payload(
    archive: &[u8],
    payload: &PayloadRef,
    state: &mut ImportState,
    opts: ImportOptions,
) -> Result<PayloadBatch, PayloadError> {
    let outcome = check(archive, payload, opts);
    state.apply_payload(payload, &outcome);
    outcome
}

/// Decoding half of [`import_payload`], safe to run on many payloads in parallel.
pub fn decode_checked(archive: &[u8], payload: &PayloadRef, opts: ImportOptions) -> Result<PayloadBatch, PayloadError> {
    check(archive, payload, opts)
}

#[cfg(test)]
mod tests {
    use std::io::Write;

    use chrono::{TimeZone, Utc};
    use zip::write::SimpleFileOptions;

    use super::*;
    use crate::ingest::row::{col, EXPORT_COLUMNS};

    fn row(id: u64) -> String {
        let mut fields = vec![String::new(); EXPORT_COLUMNS];
        fields[col::GLOBAL_EVENT_ID] = id.to_string();
        fields[col::DAY] = "20190315".into();
        fields[col::MONTH_YEAR] = "201903".into();
        fields[col::EVENT_ROOT_CODE] = "14".into();
        fields[col::ACTION_GEO_COUNTRY] = "PK".into();
        fields.join("\t")
    }

    fn zip_of(members: &[(&str, &str)]) -> Vec<u8> {
        let mut writer = zip::ZipWriter::new(Cursor::new(Vec::new()));
        for (name, body) in members {
            writer.start_file(*name, SimpleFileOptions::default()).unwrap();
            writer.write_all(body.as_bytes()).unwrap();
        }
        writer.finish().unwrap().into_inner()
    }

    fn payload(checksum: &str) -> PayloadRef {
        PayloadRef {
            size_bytes: 0,
            checksum: checksum.into(),
            url: "http://x/20190315001500.export.CSV.zip".into(),
            timestamp: Utc.with_ymd_and_hms(2019, 3, 15, 0, 15, 0).unwrap(),
        }
    }

    #[test]
    fn three_valid_rows() {
        let body = format!("{}\n{}\n{}\n", row(1), row(2), row(3));
        let archive = zip_of(&[("20190315001500.export.CSV", &body)]);
        let mut state = ImportState::default();
        let batch = import_payload(&archive, &payload("x"), &mut state, ImportOptions::default()).unwrap();
        assert_eq!(batch.records.len(), 3);
        assert_eq!(state.row_stats.parsed, 3);
        assert_eq!(state.last_imported_timestamp, Some(payload("x").timestamp));
    }

    #[test]
    fn malformed_row_is_counted() {
        let body = format!("{}\n{}\nnot\ta\trow\n", row(1), row(2));
        let archive = zip_of(&[("a.CSV", &body)]);
        let mut state = ImportState::default();
        let batch = import_payload(&archive, &payload("x"), &mut state, ImportOptions::default()).unwrap();
        assert_eq!(batch.records.len(), 2);
        assert_eq!(batch.lines, 3);
        assert_eq!(state.row_stats.malformed, 1);
    }

    #[test]
    fn non_zip_is_corrupt_and_does_not_advance() {
        let mut state = ImportState::default();
        let err = import_payload(b"definitely not a zip", &payload("x"), &mut state, ImportOptions::default())
            .unwrap_err();
        assert!(matches!(err, PayloadError::CorruptArchive(_)));
        assert_eq!(state.last_imported_timestamp, None);
        assert_eq!(state.row_stats.payloads_corrupt, 1);
    }

    #[test]
    fn two_members_is_corrupt() {
        let archive = zip_of(&[("a.CSV", &row(1)), ("b.CSV", &row(2))]);
        assert!(matches!(decode_payload(&archive), Err(PayloadError::CorruptArchive(_))));
    }

    #[test]
    fn checksum_verification() {
        let archive = zip_of(&[("a.CSV", &row(1))]);
        let opts = ImportOptions { verify_checksums: true };
        let mut state = ImportState::default();
        let err = import_payload(&archive, &payload("00"), &mut state, opts).unwrap_err();
        assert!(matches!(err, PayloadError::ChecksumMismatch { .. }));
        assert_eq!(state.row_stats.checksum_failures, 1);
        assert_eq!(state.last_imported_timestamp, None);

        let good = payload(&md5_hex(&archive));
        assert!(import_payload(&archive, &good, &mut state, opts).is_ok());
    }

    #[test]
    fn md5_known_vector() {
        assert_eq!(md5_hex(b"abc"), "900150983cd24fb0d6963f7d28e17f72");
    }

    #[test]
    fn lossy_utf8() {
        let mut body = row(1).into_bytes();
        body.push(b'\n');
        body.extend_from_slice(b"\xff\xfe broken\n");
        let mut writer = zip::ZipWriter::new(Cursor::new(Vec::new()));
        writer.start_file("a.CSV", SimpleFileOptions::default()).unwrap();
        writer.write_all(&body).unwrap();
        let archive = writer.finish().unwrap().into_inner();
        let batch = decode_payload(&archive).unwrap();
        assert_eq!((batch.records.len(), batch.malformed), (1, 1));
    }
}
