//! The GDELT master file list and import planning.

use chrono::{DateTime, NaiveDateTime, Timelike, Utc};

use super::state::ImportState;

pub const EXPORT_SUFFIX: &str = ".export.CSV.zip";

/// Pointer to one 15-minute export payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PayloadRef {
    pub size_bytes: u64,
    /// MD5 of the archive, lowercase hex.
    pub checksum: String,
    pub url: String,
    pub timestamp: DateTime<Utc>,
}

impl PayloadRef {
    /// Last path segment of the url, e.g. `20190315000000.export.CSV.zip`.
    pub fn file_name(&self) -> &str {
        self.url.rsplit('/').next().unwrap_or(&self.url)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MasterIndex {
    pub refs: Vec<PayloadRef>,
    /// Lines with fewer than three fields, an unparsable size or a bad timestamp.
    pub malformed_lines: usize,
}

/// Parses the 14-digit `YYYYMMDDHHMMSS` stamp that prefixes a payload file name.
/// Only quarter-hour stamps are valid.
pub fn parse_payload_timestamp(file_name: &str) -> Option<DateTime<Utc>> {
    let stamp = file_name.get(..14)?;
    if !stamp.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let naive = NaiveDateTime::parse_from_str(stamp, "%Y%m%d%H%M%S").ok()?;
    if naive.minute() % 15 != 0 || naive.second() != 0 {
        return None;
    }
    Some(naive.and_utc())
}

pub fn payload_file_name(timestamp: DateTime<Utc>) -> String {
    format!("{}{EXPORT_SUFFIX}", timestamp.format("%Y%m%d%H%M%S"))
}

/// Keeps the event-export entries of a master index, in file order.
/// Mentions and GKG entries are ignored; malformed lines are counted and skipped.
pub fn parse_master_index(index_text: &str) -> MasterIndex {
    let mut index = MasterIndex::default();
    for line in index_text.lines() {
        let mut parts = line.split_whitespace();
        let (Some(size), Some(checksum), Some(url)) = (parts.next(), parts.next(), parts.next()) else {
            if !line.trim().is_empty() {
                index.malformed_lines += 1;
            }
            continue;
        };
        if !url.ends_with(EXPORT_SUFFIX) {
            continue;
        }
        let file_name = url.rsplit('/').next().unwrap_or(url);
        match (size.parse::<u64>(), parse_payload_timestamp(file_name)) {
            (Ok(size_bytes), Some(timestamp)) => index.refs.push(PayloadRef {
                size_bytes,
                checksum: checksum.to_ascii_lowercase(),
                url: url.to_string(),
                timestamp,
            }),
            _ => index.malformed_lines += 1,
        }
    }
    index
}

/// Refs strictly newer than the last import, ascending by timestamp.
pub fn plan_import(index: &[PayloadRef], state: &ImportState) -> Vec<PayloadRef> {
    let mut plan: Vec<PayloadRef> = index
        .iter()
        .filter(|r| state.last_imported_timestamp.is_none_or(|last| r.timestamp > last))
        .cloned()
        .collect();
    plan.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.url.cmp(&b.url)));
    plan.dedup_by(|a, b| a.timestamp == b.timestamp && a.url == b.url);
    plan
}

#[cfg(test)]
mod tests {
    use chrono::TimeZone;

    use super::*;

    const BASE: &str = "http://data.gdeltproject.org/gdeltv2/";

    fn line(stamp: &str, kind: &str) -> String {
        format!("145434 ab12cd34ef56ab12cd34ef56ab12cd34 {BASE}{stamp}.{kind}")
    }

    #[test]
    fn keeps_only_export_entries() {
        let text = [
            line("20190315000000", "export.CSV.zip"),
            line("20190315000000", "mentions.CSV.zip"),
            line("20190315000000", "gkg.csv.zip"),
        ]
        .join("\n");
        let index = parse_master_index(&text);
        assert_eq!(index.refs.len(), 1);
        assert_eq!(index.malformed_lines, 0);
        let r = &index.refs[0];
        assert_eq!(r.size_bytes, 145434);
        assert_eq!(r.timestamp, Utc.with_ymd_and_hms(2019, 3, 15, 0, 0, 0).unwrap());
        assert_eq!(r.file_name(), "20190315000000.export.CSV.zip");
    }

    #[test]
    fn short_line_is_counted_not_fatal() {
        let text = format!("145434 ab12\n{}\n\n", line("20190315001500", "export.CSV.zip"));
        let index = parse_master_index(&text);
        assert_eq!(index.malformed_lines, 1);
        assert_eq!(index.refs.len(), 1);
    }

    #[test]
    fn off_quarter_stamp_is_malformed() {
        let index = parse_master_index(&line("20190315000700", "export.CSV.zip"));
        assert!(index.refs.is_empty());
        assert_eq!(index.malformed_lines, 1);
    }

    fn refs(stamps: &[&str]) -> Vec<PayloadRef> {
        let text: Vec<String> = stamps.iter().map(|s| line(s, "export.CSV.zip")).collect();
        parse_master_index(&text.join("\n")).refs
    }

    #[test]
    fn plan_is_strictly_newer_and_sorted() {
        let index = refs(&["20190315001500", "20190315000000"]);
        let mut state = ImportState::default();
        let all = plan_import(&index, &state);
        assert_eq!(all.len(), 2);
        assert!(all[0].timestamp < all[1].timestamp);

        state.last_imported_timestamp = Some(Utc.with_ymd_and_hms(2019, 3, 15, 0, 0, 0).unwrap());
        let plan = plan_import(&index, &state);
        assert_eq!(plan.len(), 1);
        assert_eq!(plan[0].file_name(), "20190315001500.export.CSV.zip");

        state.last_imported_timestamp = Some(Utc.with_ymd_and_hms(2020, 1, 1, 0, 0, 0).unwrap());
        assert!(plan_import(&index, &state).is_empty());
    }
}
