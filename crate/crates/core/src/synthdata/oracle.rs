//! Brute-force reference labels computed straight from daily counts.
//!
//! Deliberately naive and self-contained: every window sum is recomputed from
//! scratch and nothing here calls into the feature or labeling code.

use crate::features::FeatureConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("insufficient history: {needed} days needed, {available} available")]
    InsufficientHistory { needed: usize, available: usize },
}

/// One oracle interval: first and last day index plus the label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleInterval {
    pub index: usize,
    pub first_day: usize,
    pub last_day: usize,
    pub label: u8,
}

/// Labels every complete interval of `counts`.
///
/// The first interval starts on the first day that has both a full
/// moving-average window and `max_lag` earlier days; intervals then tile
/// forward and an incomplete tail is ignored.
pub fn oracle_labels(counts: &[u32], cfg: &FeatureConfig, delta: f64) -> Result<Vec<OracleInterval>, OracleError> {
    let w = cfg.window;
    let k = cfg.interval;
    let mut first = w - 1;
    if cfg.max_lag > first {
        first = cfg.max_lag;
    }
    if counts.len() < w || counts.len() < first + k {
        return Err(OracleError::InsufficientHistory { needed: first + k, available: counts.len() });
    }

    let mut out = Vec::new();
    let mut a = first;
    while a + k <= counts.len() {
        let b = a + k - 1;

        let mut interval_total = 0.0;
        for day in a..=b {
            interval_total += counts[day] as f64;
        }
        let mct = interval_total / k as f64;

        let mut window_total = 0.0;
        for day in (b + 1 - w)..=b {
            window_total += counts[day] as f64;
        }
        let baseline = window_total / w as f64;

        let composite = if baseline == 0.0 { 0.0 } else { -(mct / baseline) };
        let gap = if baseline >= composite { baseline - composite } else { composite - baseline };
        let threshold = composite + cfg.z * gap;

        let label = if mct - threshold > delta { 1 } else { 0 };
        out.push(OracleInterval { index: out.len(), first_day: a, last_day: b, label });
        a += k;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(window: usize, interval: usize, max_lag: usize) -> FeatureConfig {
        FeatureConfig { window, interval, max_lag, ..FeatureConfig::default() }
    }

    #[test]
    fn constant_seven_is_calm() {
        // mct = 7, theta = -1 + 2.576 * 8 = 19.608
        let out = oracle_labels(&[7; 40], &cfg(3, 3, 2), 0.0).unwrap();
        assert!(!out.is_empty());
        assert!(out.iter().all(|iv| iv.label == 0));
    }

    #[test]
    fn huge_spike_is_labeled() {
        let mut counts = vec![5u32; 150];
        counts[121] = 1000;
        let out = oracle_labels(&counts, &cfg(90, 3, 7), 0.0).unwrap();
        let hit: Vec<_> = out.iter().filter(|iv| iv.label == 1).collect();
        assert_eq!(hit.len(), 1);
        assert!(hit[0].first_day <= 121 && 121 <= hit[0].last_day);
    }

    #[test]
    fn zero_baseline_is_calm() {
        let out = oracle_labels(&[0; 100], &cfg(90, 3, 7), 0.0).unwrap();
        assert!(out.iter().all(|iv| iv.label == 0));
    }

    #[test]
    fn short_series_is_rejected() {
        assert_eq!(
            oracle_labels(&[1; 50], &cfg(90, 3, 7), 0.0),
            Err(OracleError::InsufficientHistory { needed: 92, available: 50 })
        );
    }
}
