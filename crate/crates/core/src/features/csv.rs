//! Header-bearing CSV encoding of feature rows. All fields are numeric or ISO
//! dates, so no quoting is needed.

use std::fmt::Write as _;

use chrono::NaiveDate;

use super::IntervalFeatureRow;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CsvError {
    #[error("missing header")]
    MissingHeader,
    #[error("unexpected header {0:?}")]
    Header(String),
    #[error("line {line}: {reason}")]
    Row { line: usize, reason: String },
}

/// Column names for `max_lag` lag columns.
pub fn feature_header(max_lag: usize) -> Vec<String> {
    let mut cols: Vec<String> =
        ["interval_index", "start_date", "end_date", "mct", "mct_bar", "mct_bar_comp", "theta"]
            .iter()
            .map(|s| s.to_string())
            .collect();
    cols.extend((1..=max_lag).map(|j| format!("lag_{j}")));
    cols.extend(["mean_tone", "mean_goldstein", "month"].iter().map(|s| s.to_string()));
    cols
}

pub fn write_feature_fields(out: &mut String, row: &IntervalFeatureRow) {
    let _ = write!(
        out,
        "{},{},{},{},{},{},{}",
        row.interval_index,
        row.start_date.format("%Y-%m-%d"),
        row.end_date.format("%Y-%m-%d"),
        row.mct,
        row.mct_bar,
        row.mct_bar_comp,
        row.theta
    );
    for lag in &row.lag_counts {
        let _ = write!(out, ",{lag}");
    }
    out.push(',');
    if let Some(t) = row.mean_tone {
        let _ = write!(out, "{t}");
    }
    out.push(',');
    if let Some(g) = row.mean_goldstein {
        let _ = write!(out, "{g}");
    }
    let _ = write!(out, ",{}", row.month);
}

pub fn write_feature_csv(rows: &[IntervalFeatureRow], max_lag: usize) -> String {
    let mut out = feature_header(max_lag).join(",");
    out.push('\n');
    for row in rows {
        write_feature_fields(&mut out, row);
        out.push('\n');
    }
    out
}

/// Parses the feature columns of one record; `fields` must hold exactly the
/// columns of [`feature_header`] for `max_lag`.
pub fn parse_feature_fields(fields: &[&str], max_lag: usize) -> Result<IntervalFeatureRow, String> {
    if fields.len() != 10 + max_lag {
        return Err(format!("expected {} fields, found {}", 10 + max_lag, fields.len()));
    }
    let real = |i: usize| fields[i].parse::<f64>().map_err(|_| format!("bad number {:?}", fields[i]));
    let opt_real = |i: usize| if fields[i].is_empty() { Ok(None) } else { real(i).map(Some) };
    let date = |i: usize| {
        NaiveDate::parse_from_str(fields[i], "%Y-%m-%d").map_err(|_| format!("bad date {:?}", fields[i]))
    };
    let int = |i: usize| fields[i].parse::<u64>().map_err(|_| format!("bad integer {:?}", fields[i]));
    let lag_end = 7 + max_lag;
    Ok(IntervalFeatureRow {
        interval_index: int(0)? as usize,
        start_date: date(1)?,
        end_date: date(2)?,
        mct: real(3)?,
        mct_bar: real(4)?,
        mct_bar_comp: real(5)?,
        theta: real(6)?,
        lag_counts: (7..lag_end).map(|i| int(i).map(|v| v as u32)).collect::<Result<_, _>>()?,
        mean_tone: opt_real(lag_end)?,
        mean_goldstein: opt_real(lag_end + 1)?,
        month: int(lag_end + 2)? as u32,
    })
}

/// Number of lag columns announced by a header, validating the rest of it.
pub(crate) fn lag_count_from_header(header: &str, trailing: &[&str]) -> Result<usize, CsvError> {
    let cols: Vec<&str> = header.split(',').collect();
    let base = 10 + trailing.len();
    if cols.len() < base {
        return Err(CsvError::Header(header.to_string()));
    }
    let max_lag = cols.len() - base;
    let mut expected = feature_header(max_lag);
    expected.extend(trailing.iter().map(|s| s.to_string()));
    if cols != expected {
        return Err(CsvError::Header(header.to_string()));
    }
    Ok(max_lag)
}

pub fn parse_feature_csv(text: &str) -> Result<(Vec<IntervalFeatureRow>, usize), CsvError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(CsvError::MissingHeader)?;
    let max_lag = lag_count_from_header(header, &[])?;
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        rows.push(parse_feature_fields(&fields, max_lag).map_err(|reason| CsvError::Row { line: i + 2, reason })?);
    }
    Ok((rows, max_lag))
}
