use std::collections::BTreeSet;

use chrono::{Days, NaiveDate};

use super::{generate, SynthCorpus, SynthError, SynthSpec};
use crate::features::{daily_counts, FeatureConfig};
use crate::ingest::{run_import, ImportError, ImportOptions, ImportState, PartitionStore};

/// First day whose recovered count differs from the generated one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundTripMismatch {
    pub date: NaiveDate,
    pub expected: u32,
    pub found: u32,
}

#[derive(Debug, thiserror::Error)]
pub enum RoundTripError {
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Import(#[from] ImportError),
    #[error("daily count mismatch on {}: generated {}, recovered {}", .0.date, .0.expected, .0.found)]
    Mismatch(RoundTripMismatch),
}

/// Imports `corpus` into an in-memory store and checks that the daily counts
/// recovered from it equal the generated counts on every day.
pub fn check_round_trip(corpus: &SynthCorpus, cfg: &FeatureConfig) -> Result<(), RoundTripError> {
    let country = corpus.spec.country;
    let mut state = ImportState::default();
    let mut store = PartitionStore::in_memory();
    run_import(corpus, &mut state, &mut store, &BTreeSet::from([country]), ImportOptions::default(), false)?;
    let series = daily_counts(country, &store.country_rows(country), cfg);

    let found_at = |date: NaiveDate| series.index_of(date).map_or(0, |i| series.count[i]);
    let expected_at = |date: NaiveDate| {
        let offset = (date - corpus.spec.start).num_days();
        usize::try_from(offset).ok().and_then(|i| corpus.counts.get(i).copied()).unwrap_or(0)
    };
    let mut dates: Vec<NaiveDate> = Vec::new();
    if !corpus.counts.is_empty() {
        dates.push(corpus.spec.start);
        dates.push(corpus.spec.date(corpus.counts.len() - 1));
    }
    dates.extend(series.start);
    dates.extend(series.last_date());
    let (Some(&first), Some(&last)) = (dates.iter().min(), dates.iter().max()) else {
        return Ok(());
    };
    let mut date = first;
    while date <= last {
        let (expected, found) = (expected_at(date), found_at(date));
        if expected != found {
            return Err(RoundTripError::Mismatch(RoundTripMismatch { date, expected, found }));
        }
        date = date + Days::new(1);
    }
    Ok(())
}

/// Generates `spec` and runs [`check_round_trip`] on it.
pub fn round_trip_check(spec: &SynthSpec, cfg: &FeatureConfig) -> Result<(), RoundTripError> {
    check_round_trip(&generate(spec, cfg)?, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthdata::unzip_single;

    fn spec(n_days: usize) -> SynthSpec {
        SynthSpec::new("EG".parse().unwrap(), NaiveDate::from_ymd_opt(2016, 2, 27).unwrap(), n_days, 4.0, 77)
    }

    #[test]
    fn generated_counts_survive_import() {
        round_trip_check(&spec(120), &FeatureConfig::default()).unwrap();
    }

    #[test]
    fn empty_corpus_round_trips() {
        round_trip_check(&spec(0), &FeatureConfig::default()).unwrap();
    }

    #[test]
    fn mutated_country_is_reported_on_its_day() {
        let cfg = FeatureConfig::default();
        let mut corpus = generate(&spec(40), &cfg).unwrap();
        let day = (10..40).find(|&d| corpus.counts[d] > 0).unwrap();
        let text = unzip_single(&corpus.payloads[day].bytes).unwrap();
        let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
        let target = lines.iter().position(|l| l.split('\t').nth(28) == Some("14")).unwrap();
        let mut fields: Vec<&str> = lines[target].split('\t').collect();
        fields[53] = "IZ";
        lines[target] = fields.join("\t");
        corpus.replace_payload_text(day, &(lines.join("\n") + "\n"));

        match check_round_trip(&corpus, &cfg) {
            Err(RoundTripError::Mismatch(m)) => {
                assert_eq!(m.date, corpus.spec.date(day));
                assert_eq!(m.found + 1, m.expected);
            }
            other => panic!("expected mismatch, got {other:?}"),
        }
    }
}
