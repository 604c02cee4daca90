//! Glue between the stages: events to labeled datasets, and datasets to scores.

use std::collections::BTreeSet;

use crate::country::CountryCode;
use crate::evaluation::{build_lookahead_features, compare_classifiers, Comparison, EvalError, EvalMode};
use crate::features::{build_features, daily_counts, DailySeries, FeatureConfig, FeatureError};
use crate::ingest::{run_import, EventRecord, ImportError, ImportOptions, ImportReport, ImportState, PartitionStore, PayloadSource};
use crate::labeling::{assemble_dataset, split_by_year, LabelStat, LabeledDataset, Split, SplitSpec};
use crate::models::{Hyperparams, ModelKind};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Import(#[from] ImportError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A country's daily series and the labeled interval dataset built from it.
#[derive(Debug, Clone, PartialEq)]
pub struct CountryData {
    pub series: DailySeries,
    pub dataset: LabeledDataset,
}

/// Builds features and labels from a daily series.
pub fn label_series(series: &DailySeries, cfg: &FeatureConfig, stat: LabelStat) -> Result<LabeledDataset, FeatureError> {
    cfg.validate()?;
    let rows = build_features(series, cfg)?;
    Ok(assemble_dataset(series.country, rows, cfg.max_lag, cfg.delta, stat))
}

pub fn prepare_country(
    country: CountryCode,
    rows: &[EventRecord],
    cfg: &FeatureConfig,
    stat: LabelStat,
) -> Result<CountryData, FeatureError> {
    let series = daily_counts(country, rows, cfg);
    let dataset = label_series(&series, cfg, stat)?;
    Ok(CountryData { series, dataset })
}

/// Imports everything `source` offers into a fresh in-memory store.
pub fn import_in_memory(
    source: &dyn PayloadSource,
    countries: &BTreeSet<CountryCode>,
    parallel: bool,
) -> Result<(PartitionStore, ImportReport), ImportError> {
    let mut state = ImportState::default();
    let mut store = PartitionStore::in_memory();
    let report = run_import(source, &mut state, &mut store, countries, ImportOptions::default(), parallel)?;
    Ok((store, report))
}

/// Splits `data` by year, trains every kind on the training years and scores
/// on the test years. In look-ahead mode the test features are rebuilt as
/// known `horizon` days before each interval ends; training is unchanged.
pub fn evaluate_country(
    data: &CountryData,
    cfg: &FeatureConfig,
    split: &SplitSpec,
    kinds: &[ModelKind],
    hp: &Hyperparams,
    seed: u64,
    mode: EvalMode,
) -> Result<(Comparison, Split), PipelineError> {
    let parts = split_by_year(&data.dataset, split);
    let test = match mode {
        EvalMode::Standard => parts.test.clone(),
        EvalMode::Lookahead { horizon } => build_lookahead_features(&data.series, cfg, &parts.test, horizon)?,
    };
    let comparison = compare_classifiers(&parts.train, &test, kinds, hp, seed)?;
    Ok((comparison, parts))
}
