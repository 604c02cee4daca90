//! GDELT 2.0 event rows: the 61-column export format and the 9-column store format.

use std::fmt::Write as _;

use chrono::{Datelike, NaiveDate};

use crate::country::CountryCode;

/// Number of tab-separated columns in a GDELT 2.0 event export row.
pub const EXPORT_COLUMNS: usize = 61;

/// 0-based column positions in the export row, per the GDELT 2.0 event codebook.
pub mod col {
    pub const GLOBAL_EVENT_ID: usize = 0;
    pub const DAY: usize = 1;
    pub const MONTH_YEAR: usize = 2;
    pub const YEAR: usize = 3;
    pub const FRACTION_DATE: usize = 4;
    pub const ACTOR1_TYPE1: usize = 12;
    pub const ACTOR2_TYPE1: usize = 22;
    pub const IS_ROOT_EVENT: usize = 25;
    pub const EVENT_CODE: usize = 26;
    pub const EVENT_BASE_CODE: usize = 27;
    pub const EVENT_ROOT_CODE: usize = 28;
    pub const QUAD_CLASS: usize = 29;
    pub const GOLDSTEIN_SCALE: usize = 30;
    pub const NUM_MENTIONS: usize = 31;
    pub const NUM_SOURCES: usize = 32;
    pub const NUM_ARTICLES: usize = 33;
    pub const AVG_TONE: usize = 34;
    pub const ACTION_GEO_TYPE: usize = 51;
    pub const ACTION_GEO_COUNTRY: usize = 53;
    pub const DATE_ADDED: usize = 59;
    pub const SOURCE_URL: usize = 60;
}

/// Header of the per-country, per-year store files.
pub const STORE_HEADER: &str = "global_event_id\tday\tmonth_year\tactor1_type\tactor2_type\tevent_root_code\tgoldstein_scale\tavg_tone\taction_country";

const STORE_COLUMNS: usize = 9;

/// The subset of a GDELT event row the pipeline keeps.
#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub global_event_id: u64,
    pub day: NaiveDate,
    pub month_year: u32,
    pub actor1_type: Option<String>,
    pub actor2_type: Option<String>,
    /// CAMEO root code, 1..=20.
    pub event_root_code: u8,
    /// In [-10, 10] when present.
    pub goldstein_scale: Option<f64>,
    pub avg_tone: Option<f64>,
    pub action_country: Option<CountryCode>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RowError {
    #[error("expected {expected} tab-separated fields, found {found}")]
    FieldCount { expected: usize, found: usize },
    #[error("unparsable GlobalEventID {0:?}")]
    EventId(String),
    #[error("unparsable Day {0:?}")]
    Day(String),
    #[error("unparsable MonthYear {0:?}")]
    MonthYear(String),
    #[error("MonthYear {month_year} disagrees with Day {day}")]
    DateMismatch { day: NaiveDate, month_year: u32 },
    #[error("EventRootCode {0:?} is not in 1..=20")]
    RootCode(String),
    #[error("GoldsteinScale {0:?} is not a number in [-10, 10]")]
    Goldstein(String),
    #[error("AvgTone {0:?} is not a finite number")]
    Tone(String),
    #[error("ActionGeo_CountryCode {0:?} is not a two-letter code")]
    Country(String),
}

impl EventRecord {
    pub fn year(&self) -> i32 {
        self.day.year()
    }
}

/// Parses `YYYYMMDD` without going through a format-string parser.
pub(crate) fn parse_compact_date(raw: &str) -> Option<NaiveDate> {
    let b = raw.as_bytes();
    if b.len() != 8 || !b.iter().all(u8::is_ascii_digit) {
        return None;
    }
    let num = |s: &[u8]| s.iter().fold(0u32, |acc, d| acc * 10 + u32::from(d - b'0'));
    NaiveDate::from_ymd_opt(num(&b[..4]) as i32, num(&b[4..6]), num(&b[6..8]))
}

fn parse_u64(raw: &str) -> Option<u64> {
    let b = raw.as_bytes();
    if b.is_empty() || b.len() > 19 || !b.iter().all(u8::is_ascii_digit) {
        return None;
    }
    Some(b.iter().fold(0u64, |acc, d| acc * 10 + u64::from(d - b'0')))
}

fn optional_text(raw: &str) -> Option<String> {
    (!raw.is_empty()).then(|| raw.to_string())
}

fn parse_root_code(raw: &str) -> Result<u8, RowError> {
    match parse_u64(raw) {
        Some(code @ 1..=20) => Ok(code as u8),
        _ => Err(RowError::RootCode(raw.to_string())),
    }
}

fn parse_goldstein(raw: &str) -> Result<Option<f64>, RowError> {
    if raw.is_empty() {
        return Ok(None);
    }
    match raw.parse::<f64>() {
        Ok(v) if (-10.0..=10.0).contains(&v) => Ok(Some(v)),
        _ => Err(RowError::Goldstein(raw.to_string())),
    }
}

fn parse_tone(raw: &str) -> Result<Option<f64>, RowError> {
    if raw.is_empty() {
        return Ok(None);
    }
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(RowError::Tone(raw.to_string())),
    }
}

fn parse_country(raw: &str) -> Result<Option<CountryCode>, RowError> {
    if raw.is_empty() {
        return Ok(None);
    }
    CountryCode::from_bytes(raw.as_bytes())
        .map(Some)
        .ok_or_else(|| RowError::Country(raw.to_string()))
}

fn build_record(
    id: &str,
    day: &str,
    month_year: &str,
    actor1: &str,
    actor2: &str,
    root: &str,
    goldstein: &str,
    tone: &str,
    country: &str,
) -> Result<EventRecord, RowError> {
    let global_event_id = parse_u64(id).ok_or_else(|| RowError::EventId(id.to_string()))?;
    let day_date = parse_compact_date(day).ok_or_else(|| RowError::Day(day.to_string()))?;
    let month_year_num = match parse_u64(month_year) {
        Some(v) if month_year.len() == 6 => v as u32,
        _ => return Err(RowError::MonthYear(month_year.to_string())),
    };
    if month_year_num != day_date.year() as u32 * 100 + day_date.month() {
        return Err(RowError::DateMismatch { day: day_date, month_year: month_year_num });
    }
    Ok(EventRecord {
        global_event_id,
        day: day_date,
        month_year: month_year_num,
        actor1_type: optional_text(actor1),
        actor2_type: optional_text(actor2),
        event_root_code: parse_root_code(root)?,
        goldstein_scale: parse_goldstein(goldstein)?,
        avg_tone: parse_tone(tone)?,
        action_country: parse_country(country)?,
    })
}

/// Parses one 61-column export row by fixed column position.
///
/// Empty fields become `None`; they are never read as zero. A trailing `\r` is ignored.
pub fn parse_event_row(line: &str) -> Result<EventRecord, RowError> {
    let line = line.strip_suffix('\r').unwrap_or(line);
    let mut fields = [""; EXPORT_COLUMNS];
    let mut found = 0usize;
    for field in line.split('\t') {
        if found < EXPORT_COLUMNS {
            fields[found] = field;
        }
        found += 1;
    }
    if found != EXPORT_COLUMNS {
        return Err(RowError::FieldCount { expected: EXPORT_COLUMNS, found });
    }
    build_record(
        fields[col::GLOBAL_EVENT_ID],
        fields[col::DAY],
        fields[col::MONTH_YEAR],
        fields[col::ACTOR1_TYPE1],
        fields[col::ACTOR2_TYPE1],
        fields[col::EVENT_ROOT_CODE],
        fields[col::GOLDSTEIN_SCALE],
        fields[col::AVG_TONE],
        fields[col::ACTION_GEO_COUNTRY],
    )
}

/// Parses one row of a partition store file (see [`STORE_HEADER`]).
pub fn parse_store_row(line: &str) -> Result<EventRecord, RowError> {
    let line = line.strip_suffix('\r').unwrap_or(line);
    let mut fields = [""; STORE_COLUMNS];
    let mut found = 0usize;
    for field in line.split('\t') {
        if found < STORE_COLUMNS {
            fields[found] = field;
        }
        found += 1;
    }
    if found != STORE_COLUMNS {
        return Err(RowError::FieldCount { expected: STORE_COLUMNS, found });
    }
    let [id, day, month_year, a1, a2, root, goldstein, tone, country] = fields;
    build_record(id, day, month_year, a1, a2, root, goldstein, tone, country)
}

/// Appends the store encoding of `record` (no trailing newline).
///
/// Root codes are written zero-padded to two digits and reals in their shortest
/// round-trip form, which is how GDELT writes them.
pub fn write_event_row(out: &mut String, record: &EventRecord) {
    let _ = write!(
        out,
        "{}\t{}\t{}\t{}\t{}\t{:02}\t",
        record.global_event_id,
        record.day.format("%Y%m%d"),
        record.month_year,
        record.actor1_type.as_deref().unwrap_or(""),
        record.actor2_type.as_deref().unwrap_or(""),
        record.event_root_code,
    );
    if let Some(g) = record.goldstein_scale {
        let _ = write!(out, "{g}");
    }
    out.push('\t');
    if let Some(t) = record.avg_tone {
        let _ = write!(out, "{t}");
    }
    out.push('\t');
    if let Some(c) = record.action_country {
        out.push_str(c.as_str());
    }
}

pub fn format_event_row(record: &EventRecord) -> String {
    let mut out = String::with_capacity(64);
    write_event_row(&mut out, record);
    out
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn crafted_row(overrides: &[(usize, &str)]) -> String {
        let mut fields: Vec<String> = (0..EXPORT_COLUMNS).map(|i| format!("x{i}")).collect();
        fields[col::GLOBAL_EVENT_ID] = "829463421".into();
        fields[col::DAY] = "20190315".into();
        fields[col::MONTH_YEAR] = "201903".into();
        fields[col::ACTOR1_TYPE1] = "CVL".into();
        fields[col::ACTOR2_TYPE1] = "GOV".into();
        fields[col::EVENT_ROOT_CODE] = "14".into();
        fields[col::GOLDSTEIN_SCALE] = "-6.5".into();
        fields[col::AVG_TONE] = "-3.25".into();
        fields[col::ACTION_GEO_COUNTRY] = "PK".into();
        for (idx, value) in overrides {
            fields[*idx] = value.to_string();
        }
        fields.join("\t")
    }

    #[test]
    fn extracts_subset_by_position() {
        let rec = parse_event_row(&crafted_row(&[])).unwrap();
        assert_eq!(rec.global_event_id, 829463421);
        assert_eq!(rec.day, NaiveDate::from_ymd_opt(2019, 3, 15).unwrap());
        assert_eq!(rec.month_year, 201903);
        assert_eq!(rec.actor1_type.as_deref(), Some("CVL"));
        assert_eq!(rec.actor2_type.as_deref(), Some("GOV"));
        assert_eq!(rec.event_root_code, 14);
        assert_eq!(rec.goldstein_scale, Some(-6.5));
        assert_eq!(rec.avg_tone, Some(-3.25));
        assert_eq!(rec.action_country, Some("PK".parse().unwrap()));
    }

    #[test]
    fn sixty_fields_is_malformed() {
        let row = crafted_row(&[]);
        let truncated = row.rsplit_once('\t').unwrap().0;
        assert_eq!(
            parse_event_row(truncated),
            Err(RowError::FieldCount { expected: 61, found: 60 })
        );
        let extended = format!("{row}\textra");
        assert!(matches!(parse_event_row(&extended), Err(RowError::FieldCount { found: 62, .. })));
    }

    #[test]
    fn empty_goldstein_is_absent_not_zero() {
        let rec = parse_event_row(&crafted_row(&[(col::GOLDSTEIN_SCALE, "")])).unwrap();
        assert_eq!(rec.goldstein_scale, None);
        let rec = parse_event_row(&crafted_row(&[(col::AVG_TONE, ""), (col::ACTION_GEO_COUNTRY, "")]))
            .unwrap();
        assert_eq!(rec.avg_tone, None);
        assert_eq!(rec.action_country, None);
    }

    #[test]
    fn rejects_bad_fields() {
        assert!(matches!(
            parse_event_row(&crafted_row(&[(col::EVENT_ROOT_CODE, "21")])),
            Err(RowError::RootCode(_))
        ));
        assert!(matches!(
            parse_event_row(&crafted_row(&[(col::EVENT_ROOT_CODE, "")])),
            Err(RowError::RootCode(_))
        ));
        assert!(matches!(
            parse_event_row(&crafted_row(&[(col::GLOBAL_EVENT_ID, "abc")])),
            Err(RowError::EventId(_))
        ));
        assert!(matches!(
            parse_event_row(&crafted_row(&[(col::DAY, "20190230")])),
            Err(RowError::Day(_))
        ));
        assert!(matches!(
            parse_event_row(&crafted_row(&[(col::MONTH_YEAR, "201904")])),
            Err(RowError::DateMismatch { .. })
        ));
        assert!(matches!(
            parse_event_row(&crafted_row(&[(col::GOLDSTEIN_SCALE, "-11")])),
            Err(RowError::Goldstein(_))
        ));
        assert!(matches!(
            parse_event_row(&crafted_row(&[(col::ACTION_GEO_COUNTRY, "PAK")])),
            Err(RowError::Country(_))
        ));
    }

    #[test]
    fn leading_zero_root_code_and_crlf() {
        let row = format!("{}\r", crafted_row(&[(col::EVENT_ROOT_CODE, "04")]));
        let rec = parse_event_row(&row).unwrap();
        assert_eq!(rec.event_root_code, 4);
        assert_eq!(rec.action_country.unwrap().as_str(), "PK");
    }

    fn opt_field(re: &'static str) -> impl Strategy<Value = String> {
        prop_oneof![Just(String::new()), re]
    }

    fn real_text(lo: f64, hi: f64) -> impl Strategy<Value = String> {
        prop_oneof![
            Just(String::new()),
            (lo..hi).prop_map(|v: f64| format!("{v}")),
            (-100i32..=100).prop_map(move |v| {
                let x = f64::from(v) / 10.0;
                format!("{}", x.clamp(lo, hi))
            }),
        ]
    }

    proptest! {
        #[test]
        fn store_encoding_echoes_extracted_fields(
            id in 0u64..=u64::MAX / 10,
            date in (2015i32..2022, 1u32..=12, 1u32..=28),
            a1 in opt_field("[A-Z]{3}"),
            a2 in opt_field("[A-Z]{3}"),
            root in 1u8..=20,
            goldstein in real_text(-10.0, 10.0),
            tone in real_text(-40.0, 40.0),
            country in opt_field("[A-Z]{2}"),
        ) {
            let day = format!("{:04}{:02}{:02}", date.0, date.1, date.2);
            let month_year = format!("{:04}{:02}", date.0, date.1);
            let root_text = format!("{root:02}");
            let id_text = id.to_string();
            let row = crafted_row(&[
                (col::GLOBAL_EVENT_ID, &id_text),
                (col::DAY, &day),
                (col::MONTH_YEAR, &month_year),
                (col::ACTOR1_TYPE1, &a1),
                (col::ACTOR2_TYPE1, &a2),
                (col::EVENT_ROOT_CODE, &root_text),
                (col::GOLDSTEIN_SCALE, &goldstein),
                (col::AVG_TONE, &tone),
                (col::ACTION_GEO_COUNTRY, &country),
            ]);
            let record = parse_event_row(&row).unwrap();
            let expected = [
                id_text.as_str(), &day, &month_year, &a1, &a2, &root_text, &goldstein, &tone, &country,
            ]
            .join("\t");
            let formatted = format_event_row(&record);
            prop_assert_eq!(&formatted, &expected);
            prop_assert_eq!(parse_store_row(&formatted).unwrap(), record);
        }
    }
}
