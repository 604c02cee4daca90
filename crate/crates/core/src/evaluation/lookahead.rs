//! Features as they would have been known `horizon` days before an interval ends.
//!
//! Days after the cutoff `end - horizon` are replaced by the last observed day
//! (persistence), then the interval statistics are recomputed.

use super::EvalError;
use crate::features::{interval_row, DailySeries, FeatureConfig, Interval, IntervalFeatureRow};
use crate::labeling::{LabeledDataset, LabeledRow};

/// Recomputes one interval's features from series days up to `interval.end - horizon`.
pub fn lookahead_row(
    series: &DailySeries,
    cfg: &FeatureConfig,
    interval: &Interval,
    horizon: usize,
) -> IntervalFeatureRow {
    let end = interval.end;
    let cutoff = end - horizon;
    let lo = (end + 1 - cfg.window).min(interval.start).min(end - cfg.max_lag);
    let mut view = DailySeries::zeroed(series.country, series.date(lo), end - lo + 1);
    for i in lo..=end {
        let src = i.min(cutoff);
        let j = i - lo;
        view.count[j] = series.count[src];
        view.tone_sum[j] = series.tone_sum[src];
        view.tone_n[j] = series.tone_n[src];
        view.goldstein_sum[j] = series.goldstein_sum[src];
        view.goldstein_n[j] = series.goldstein_n[src];
    }
    let local = Interval { start: interval.start - lo, end: end - lo, ..*interval };
    let baseline = view.count[local.end + 1 - cfg.window..=local.end].iter().map(|&c| f64::from(c)).sum::<f64>()
        / cfg.window as f64;
    interval_row(&view, &local, baseline, cfg)
}

/// Rebuilds every row of `ds` as known `horizon` days early; labels are kept.
/// `horizon = 0` returns the dataset unchanged.
pub fn build_lookahead_features(
    series: &DailySeries,
    cfg: &FeatureConfig,
    ds: &LabeledDataset,
    horizon: usize,
) -> Result<LabeledDataset, EvalError> {
    if horizon > cfg.max_lag {
        return Err(EvalError::HorizonExceedsMaxLag { horizon, max_lag: cfg.max_lag });
    }
    if horizon == 0 {
        return Ok(ds.clone());
    }
    let first_start = cfg.first_interval_start();
    let mut rows = Vec::with_capacity(ds.len());
    for row in &ds.rows {
        let f = &row.features;
        let end = series.index_of(f.end_date).ok_or(EvalError::RowOutsideSeries(f.end_date))?;
        if end + 1 < cfg.interval || end + 1 - cfg.interval < first_start {
            return Err(EvalError::RowOutsideSeries(f.end_date));
        }
        let interval = Interval {
            index: f.interval_index,
            start: end + 1 - cfg.interval,
            end,
            start_date: f.start_date,
            end_date: f.end_date,
        };
        rows.push(LabeledRow { features: lookahead_row(series, cfg, &interval, horizon), label: row.label });
    }
    Ok(LabeledDataset { rows, ..ds.clone() })
}
