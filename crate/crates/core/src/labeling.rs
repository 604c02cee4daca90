//! Binary unrest labels and the calendar-year train/test split.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use chrono::Datelike;
use serde::{Deserialize, Serialize};

use crate::country::CountryCode;
use crate::features::{feature_header, parse_feature_fields, write_feature_fields, CsvError, IntervalFeatureRow};

pub const SCHEMA_VERSION: u32 = 1;

/// Which interval statistic is compared against δ.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum LabelStat {
    /// `mct - theta > δ`.
    #[default]
    ThetaMargin,
    /// `mct_bar_comp > δ`. Since `mct_bar_comp <= 0`, this labels nothing for δ >= 0.
    LiteralMctComp,
}

impl FromStr for LabelStat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "theta_margin" => Ok(LabelStat::ThetaMargin),
            "literal_mct_comp" => Ok(LabelStat::LiteralMctComp),
            other => Err(format!("unknown label statistic {other:?} (theta_margin | literal_mct_comp)")),
        }
    }
}

impl fmt::Display for LabelStat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LabelStat::ThetaMargin => "theta_margin",
            LabelStat::LiteralMctComp => "literal_mct_comp",
        })
    }
}

/// 1 (unrest) iff `mct - theta > delta`, strictly.
pub fn label_interval(row: &IntervalFeatureRow, delta: f64) -> u8 {
    label_with(row, delta, LabelStat::ThetaMargin)
}

pub fn label_with(row: &IntervalFeatureRow, delta: f64, stat: LabelStat) -> u8 {
    let statistic = match stat {
        LabelStat::ThetaMargin => row.mct - row.theta,
        LabelStat::LiteralMctComp => row.mct_bar_comp,
    };
    u8::from(statistic > delta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledRow {
    pub features: IntervalFeatureRow,
    pub label: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub country: CountryCode,
    pub max_lag: usize,
    pub rows: Vec<LabeledRow>,
    pub schema_version: u32,
}

pub fn assemble_dataset(
    country: CountryCode,
    rows: Vec<IntervalFeatureRow>,
    max_lag: usize,
    delta: f64,
    stat: LabelStat,
) -> LabeledDataset {
    let rows = rows
        .into_iter()
        .map(|features| {
            let label = label_with(&features, delta, stat);
            LabeledRow { features, label }
        })
        .collect();
    LabeledDataset { country, max_lag, rows, schema_version: SCHEMA_VERSION }
}

impl LabeledDataset {
    pub fn empty(country: CountryCode, max_lag: usize) -> Self {
        LabeledDataset { country, max_lag, rows: Vec::new(), schema_version: SCHEMA_VERSION }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.rows.iter().map(|r| r.label).collect()
    }

    pub fn positives(&self) -> usize {
        self.rows.iter().filter(|r| r.label == 1).count()
    }

    fn with_rows(&self, rows: Vec<LabeledRow>) -> Self {
        LabeledDataset { country: self.country, max_lag: self.max_lag, rows, schema_version: self.schema_version }
    }

    pub fn to_csv(&self) -> String {
        let mut out = feature_header(self.max_lag).join(",");
        out.push_str(",label\n");
        for row in &self.rows {
            write_feature_fields(&mut out, &row.features);
            out.push(',');
            out.push(char::from(b'0' + row.label));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(country: CountryCode, text: &str) -> Result<Self, CsvError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or(CsvError::MissingHeader)?;
        let max_lag = crate::features::csv_lag_count(header, &["label"])?;
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let err = |reason: String| CsvError::Row { line: i + 2, reason };
            let fields: Vec<&str> = line.split(',').collect();
            let (label_field, feature_fields) = fields.split_last().ok_or_else(|| err("empty row".into()))?;
            let label = match *label_field {
                "0" => 0,
                "1" => 1,
                other => return Err(err(format!("label {other:?} is not 0 or 1"))),
            };
            let features = parse_feature_fields(feature_fields, max_lag).map_err(err)?;
            rows.push(LabeledRow { features, label });
        }
        Ok(LabeledDataset { country, max_lag, rows, schema_version: SCHEMA_VERSION })
    }
}

/// Calendar-year assignment of rows to train, test, or discard.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_years: BTreeSet<i32>,
    pub test_years: BTreeSet<i32>,
    pub discard_years: BTreeSet<i32>,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_years: (2015..=2018).collect(),
            test_years: BTreeSet::from([2019]),
            discard_years: BTreeSet::from([2020, 2021]),
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<(), String> {
        let overlap = |a: &BTreeSet<i32>, b: &BTreeSet<i32>| a.intersection(b).next().copied();
        if let Some(y) = overlap(&self.train_years, &self.test_years)
            .or_else(|| overlap(&self.train_years, &self.discard_years))
            .or_else(|| overlap(&self.test_years, &self.discard_years))
        {
            return Err(format!("year {y} appears in more than one split set"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitWarning {
    EmptyTrain,
    EmptyTest,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
    /// Rows in a discard year.
    pub discarded: usize,
    /// Rows whose year is in none of the three sets.
    pub out_of_range: usize,
    pub warnings: Vec<SplitWarning>,
}

/// Assigns each row by the year of its interval's last day.
pub fn split_by_year(ds: &LabeledDataset, spec: &SplitSpec) -> Split {
    let mut train = Vec::new();
    let mut test = Vec::new();
    let (mut discarded, mut out_of_range) = (0, 0);
    for row in &ds.rows {
        let year = row.features.end_date.year();
        if spec.train_years.contains(&year) {
            train.push(row.clone());
        } else if spec.test_years.contains(&year) {
            test.push(row.clone());
        } else if spec.discard_years.contains(&year) {
            discarded += 1;
        } else {
            out_of_range += 1;
        }
    }
    let mut warnings = Vec::new();
    if train.is_empty() {
        warnings.push(SplitWarning::EmptyTrain);
    }
    if test.is_empty() {
        warnings.push(SplitWarning::EmptyTest);
    }
    Split { train: ds.with_rows(train), test: ds.with_rows(test), discarded, out_of_range, warnings }
}
