use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Spike, SynthSpec};
use crate::country::CountryCode;
use crate::features::FeatureConfig;

/// Shape of the benchmark suite: a multi-year corpus per seed with spikes of
/// mixed strength scattered after the warm-up.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub base_rates: Vec<f64>,
    pub multipliers: Vec<f64>,
    pub spike_lengths: (usize, usize),
    /// Average days between spike starts.
    pub spike_spacing: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            start: NaiveDate::from_ymd_opt(2014, 9, 1).expect("valid date"),
            end: NaiveDate::from_ymd_opt(2020, 12, 31).expect("valid date"),
            base_rates: vec![2.0, 5.0, 20.0],
            multipliers: vec![3.0, 5.0, 10.0],
            spike_lengths: (3, 7),
            spike_spacing: 40,
        }
    }
}

impl SuiteConfig {
    pub fn n_days(&self) -> usize {
        (self.end - self.start).num_days() as usize + 1
    }

    /// The spec for suite member `seed`. The base rate cycles through
    /// `base_rates`; spike positions, lengths and multipliers are drawn from
    /// the seed.
    pub fn spec(&self, country: CountryCode, seed: u64, cfg: &FeatureConfig) -> SynthSpec {
        let n_days = self.n_days();
        let rate = self.base_rates[(seed % self.base_rates.len() as u64) as usize];
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED_5u64.rotate_left(32));
        let (min_len, max_len) = self.spike_lengths;
        let mut spikes = Vec::new();
        let mut day = cfg.window + cfg.max_lag;
        loop {
            day += rng.random_range(self.spike_spacing / 2..=self.spike_spacing * 3 / 2);
            let length = rng.random_range(min_len..=max_len);
            if day + length > n_days {
                break;
            }
            let multiplier = self.multipliers[rng.random_range(0..self.multipliers.len())];
            spikes.push(Spike { start_day: day, length_days: length, multiplier });
            day += length;
        }
        SynthSpec { spikes, ..SynthSpec::new(country, self.start, n_days, rate, seed) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_specs_are_valid_and_varied() {
        let cfg = FeatureConfig::default();
        let suite = SuiteConfig::default();
        let a = suite.spec("SU".parse().unwrap(), 1, &cfg);
        let b = suite.spec("SU".parse().unwrap(), 2, &cfg);
        a.validate_for(&cfg).unwrap();
        b.validate_for(&cfg).unwrap();
        assert!(a.spikes.len() > 30);
        assert_ne!(a.spikes, b.spikes);
        assert_eq!(a, suite.spec("SU".parse().unwrap(), 1, &cfg));
    }
}
