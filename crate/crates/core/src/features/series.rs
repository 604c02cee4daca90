use chrono::{Days, NaiveDate};

use super::FeatureConfig;
use crate::country::CountryCode;
use crate::ingest::EventRecord;

/// Per-day protest counts and tone/Goldstein accumulators on a gap-free date axis.
#[derive(Debug, Clone, PartialEq)]
pub struct DailySeries {
    pub country: CountryCode,
    /// Date of index 0; `None` for an empty series.
    pub start: Option<NaiveDate>,
    /// Events per day whose root code is in the configured set.
    pub count: Vec<u32>,
    pub tone_sum: Vec<f64>,
    pub tone_n: Vec<u32>,
    pub goldstein_sum: Vec<f64>,
    pub goldstein_n: Vec<u32>,
}

impl DailySeries {
    pub fn empty(country: CountryCode) -> Self {
        Self::zeroed(country, None, 0)
    }

    pub fn zeroed(country: CountryCode, start: Option<NaiveDate>, len: usize) -> Self {
        DailySeries {
            country,
            start,
            count: vec![0; len],
            tone_sum: vec![0.0; len],
            tone_n: vec![0; len],
            goldstein_sum: vec![0.0; len],
            goldstein_n: vec![0; len],
        }
    }

    /// Builds a series from plain counts with no tone or Goldstein data.
    pub fn from_counts(country: CountryCode, start: NaiveDate, counts: &[u32]) -> Self {
        let mut series = Self::zeroed(country, Some(start), counts.len());
        series.count.copy_from_slice(counts);
        series
    }

    pub fn len(&self) -> usize {
        self.count.len()
    }

    pub fn is_empty(&self) -> bool {
        self.count.is_empty()
    }

    pub fn date(&self, index: usize) -> Option<NaiveDate> {
        self.start?.checked_add_days(Days::new(index as u64))
    }

    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        let offset = (date - self.start?).num_days();
        (offset >= 0 && (offset as usize) < self.len()).then_some(offset as usize)
    }

    pub fn counts_f64(&self) -> Vec<f64> {
        self.count.iter().map(|&c| f64::from(c)).collect()
    }

    pub fn last_date(&self) -> Option<NaiveDate> {
        self.len().checked_sub(1).and_then(|i| self.date(i))
    }
}

/// Aggregates one country's events to daily granularity between the earliest and
/// latest event date, zero-filling days without matching events.
pub fn daily_counts(country: CountryCode, rows: &[EventRecord], cfg: &FeatureConfig) -> DailySeries {
    let Some(first) = rows.iter().map(|r| r.day).min() else {
        return DailySeries::empty(country);
    };
    let last = rows.iter().map(|r| r.day).max().expect("non-empty");
    daily_counts_between(country, rows, cfg, first, last)
}

/// Same as [`daily_counts`] on a fixed `[first, last]` axis; rows outside it are ignored.
pub fn daily_counts_between(
    country: CountryCode,
    rows: &[EventRecord],
    cfg: &FeatureConfig,
    first: NaiveDate,
    last: NaiveDate,
) -> DailySeries {
    if last < first {
        return DailySeries::empty(country);
    }
    let len = (last - first).num_days() as usize + 1;
    let mut series = DailySeries::zeroed(country, Some(first), len);
    for row in rows {
        let offset = (row.day - first).num_days();
        if offset < 0 || offset as usize >= len || !cfg.root_codes.contains(&row.event_root_code) {
            continue;
        }
        let i = offset as usize;
        series.count[i] += 1;
        if let Some(t) = row.avg_tone {
            series.tone_sum[i] += t;
            series.tone_n[i] += 1;
        }
        if let Some(g) = row.goldstein_scale {
            series.goldstein_sum[i] += g;
            series.goldstein_n[i] += 1;
        }
    }
    series
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(day: u32, root: u8, tone: Option<f64>) -> EventRecord {
        let date = NaiveDate::from_ymd_opt(2019, 3, day).unwrap();
        EventRecord {
            global_event_id: u64::from(day) * 100 + u64::from(root),
            day: date,
            month_year: 201903,
            actor1_type: None,
            actor2_type: None,
            event_root_code: root,
            goldstein_scale: None,
            avg_tone: tone,
            action_country: None,
        }
    }

    fn pk() -> CountryCode {
        "PK".parse().unwrap()
    }

    #[test]
    fn counts_only_configured_root_codes() {
        let rows = vec![rec(1, 14, Some(1.0)), rec(1, 14, None), rec(1, 14, Some(3.0)), rec(1, 10, Some(9.0))];
        let series = daily_counts(pk(), &rows, &FeatureConfig::default());
        assert_eq!(series.count, vec![3]);
        assert_eq!(series.tone_n, vec![2]);
        assert_eq!(series.tone_sum, vec![4.0]);
    }

    #[test]
    fn densifies_gaps() {
        let rows = vec![rec(1, 14, None), rec(3, 14, None)];
        let series = daily_counts(pk(), &rows, &FeatureConfig::default());
        assert_eq!(series.count, vec![1, 0, 1]);
        assert_eq!(series.date(1), NaiveDate::from_ymd_opt(2019, 3, 2));
        assert_eq!(series.index_of(NaiveDate::from_ymd_opt(2019, 3, 3).unwrap()), Some(2));
    }

    #[test]
    fn empty_input_gives_empty_series() {
        let series = daily_counts(pk(), &[], &FeatureConfig::default());
        assert!(series.is_empty());
        assert_eq!(series.start, None);
    }

    #[test]
    fn fixed_axis_keeps_leading_zero_days() {
        let rows = vec![rec(3, 14, None)];
        let first = NaiveDate::from_ymd_opt(2019, 3, 1).unwrap();
        let last = NaiveDate::from_ymd_opt(2019, 3, 4).unwrap();
        let series = daily_counts_between(pk(), &rows, &FeatureConfig::default(), first, last);
        assert_eq!(series.count, vec![0, 0, 1, 0]);
    }
}
