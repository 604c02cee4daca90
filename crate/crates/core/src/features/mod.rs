//! Interval threshold features over daily protest counts.
//!
//! Counts are compared against a trailing moving-average baseline on
//! non-overlapping k-day intervals:
//!
//! * `mct` is the interval's mean daily count,
//! * `mct_bar` is the W-day trailing mean at the interval's last day,
//! * `mct_bar_comp = -(mct / mct_bar)`,
//! * `theta = mct_bar_comp + z * |mct_bar - mct_bar_comp|`.

mod csv;
mod series;

use std::collections::BTreeSet;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

pub use self::csv::{feature_header, parse_feature_csv, parse_feature_fields, write_feature_csv, write_feature_fields, CsvError};
pub(crate) use self::csv::lag_count_from_header as csv_lag_count;
pub use series::{daily_counts, daily_counts_between, DailySeries};

pub const DEFAULT_Z: f64 = 2.576;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// Moving-average window W in days.
    pub window: usize,
    /// Interval length k in days, 3..=7.
    pub interval: usize,
    /// Number of daily lag columns L.
    pub max_lag: usize,
    pub z: f64,
    /// CAMEO root codes counted as events (protest is 14).
    pub root_codes: BTreeSet<u8>,
    /// Labeling margin δ.
    pub delta: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            window: 90,
            interval: 3,
            max_lag: 7,
            z: DEFAULT_Z,
            root_codes: BTreeSet::from([14]),
            delta: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FeatureError {
    #[error("invalid feature config: {0}")]
    InvalidConfig(String),
    #[error("insufficient history: {needed} days needed for one interval, {available} available")]
    InsufficientHistory { needed: usize, available: usize },
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<(), FeatureError> {
        let bad = |msg: String| Err(FeatureError::InvalidConfig(msg));
        if !(3..=7).contains(&self.interval) {
            return bad(format!("interval must be in 3..=7, got {}", self.interval));
        }
        if self.window < self.interval {
            return bad(format!("window {} is shorter than interval {}", self.window, self.interval));
        }
        if !(self.z > 0.0 && self.z.is_finite()) {
            return bad(format!("z must be positive, got {}", self.z));
        }
        if !self.delta.is_finite() {
            return bad("delta must be finite".into());
        }
        if self.root_codes.is_empty() || self.root_codes.iter().any(|c| !(1..=20).contains(c)) {
            return bad("root_codes must be a non-empty subset of 1..=20".into());
        }
        Ok(())
    }

    /// Index of the first day an interval may start on: the moving average
    /// must be defined and all lag days must exist.
    pub fn first_interval_start(&self) -> usize {
        (self.window - 1).max(self.max_lag)
    }

    /// Series length needed for a single interval.
    pub fn min_history(&self) -> usize {
        self.first_interval_start() + self.interval
    }
}

/// Trailing moving average; `values[j]` is the mean of the `window` inputs ending at `j + window - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MovingAverage {
    pub window: usize,
    pub values: Vec<f64>,
}

impl MovingAverage {
    /// Mean at input index `i`, `None` inside the warm-up.
    pub fn at(&self, i: usize) -> Option<f64> {
        i.checked_sub(self.window - 1).and_then(|j| self.values.get(j).copied())
    }

    /// True when the input was shorter than the window.
    pub fn is_warm_up_only(&self) -> bool {
        self.values.is_empty()
    }
}

/// Neumaier-compensated running sum, so long rolling windows do not drift.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Trailing `window`-day mean, defined from index `window - 1` onward.
///
/// # Panics
/// If `window` is zero.
pub fn moving_average(values: &[f64], window: usize) -> MovingAverage {
    assert!(window >= 1, "moving average window must be at least 1");
    if values.len() < window {
        return MovingAverage { window, values: Vec::new() };
    }
    let mut out = Vec::with_capacity(values.len() - window + 1);
    let mut acc = CompensatedSum::default();
    for &v in &values[..window] {
        acc.add(v);
    }
    let w = window as f64;
    out.push(acc.value() / w);
    for i in window..values.len() {
        acc.add(values[i]);
        acc.add(-values[i - window]);
        out.push(acc.value() / w);
    }
    MovingAverage { window, values: out }
}

/// One k-day interval by series index (both ends inclusive) and date.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interval {
    pub index: usize,
    pub start: usize,
    pub end: usize,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
}

/// Tiles the post-warm-up part of `series` with consecutive k-day intervals,
/// dropping a trailing partial interval.
pub fn make_intervals(series: &DailySeries, cfg: &FeatureConfig) -> Vec<Interval> {
    let k = cfg.interval;
    let mut out = Vec::new();
    let mut start = cfg.first_interval_start();
    while start + k <= series.len() {
        let end = start + k - 1;
        out.push(Interval {
            index: out.len(),
            start,
            end,
            start_date: series.date(start).expect("dated series"),
            end_date: series.date(end).expect("dated series"),
        });
        start += k;
    }
    out
}

/// `-(mct / mct_bar)`, or 0 when the baseline is 0.
pub fn mct_bar_comp(mct: f64, mct_bar: f64) -> f64 {
    if mct_bar == 0.0 {
        return 0.0;
    }
    // + 0.0 turns -0.0 into 0.0
    -(mct / mct_bar) + 0.0
}

/// Unrest threshold `mct_bar_comp + z * |mct_bar - mct_bar_comp|`.
pub fn theta(mct_bar: f64, mct_bar_comp: f64, z: f64) -> f64 {
    mct_bar_comp + z * (mct_bar - mct_bar_comp).abs()
}

/// Features of one interval.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalFeatureRow {
    pub interval_index: usize,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    pub mct: f64,
    pub mct_bar: f64,
    pub mct_bar_comp: f64,
    pub theta: f64,
    /// Daily counts at `end_date - 1 ..= end_date - L`.
    pub lag_counts: Vec<u32>,
    pub mean_tone: Option<f64>,
    pub mean_goldstein: Option<f64>,
    pub month: u32,
}

/// Builds the row for `interval` given the baseline at its last day.
/// Reads only series days up to `interval.end`.
pub(crate) fn interval_row(series: &DailySeries, interval: &Interval, mct_bar: f64, cfg: &FeatureConfig) -> IntervalFeatureRow {
    let days = interval.start..=interval.end;
    let total: u64 = series.count[days.clone()].iter().map(|&c| u64::from(c)).sum();
    let mct = total as f64 / cfg.interval as f64;
    let comp = mct_bar_comp(mct, mct_bar);
    let pooled_mean = |sums: &[f64], ns: &[u32]| {
        let n: u32 = ns[days.clone()].iter().sum();
        (n > 0).then(|| sums[days.clone()].iter().sum::<f64>() / f64::from(n))
    };
    IntervalFeatureRow {
        interval_index: interval.index,
        start_date: interval.start_date,
        end_date: interval.end_date,
        mct,
        mct_bar,
        mct_bar_comp: comp,
        theta: theta(mct_bar, comp, cfg.z),
        lag_counts: (1..=cfg.max_lag).map(|j| series.count[interval.end - j]).collect(),
        mean_tone: pooled_mean(&series.tone_sum, &series.tone_n),
        mean_goldstein: pooled_mean(&series.goldstein_sum, &series.goldstein_n),
        month: interval.end_date.month(),
    }
}

/// One feature row per interval, in date order.
pub fn build_features(series: &DailySeries, cfg: &FeatureConfig) -> Result<Vec<IntervalFeatureRow>, FeatureError> {
    let intervals = make_intervals(series, cfg);
    if intervals.is_empty() {
        return Err(FeatureError::InsufficientHistory { needed: cfg.min_history(), available: series.len() });
    }
    let ma = moving_average(&series.counts_f64(), cfg.window);
    Ok(intervals
        .iter()
        .map(|iv| interval_row(series, iv, ma.at(iv.end).expect("interval past warm-up"), cfg))
        .collect())
}
