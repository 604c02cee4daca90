//! GDELT 2.0 ingestion: master index, zipped payloads, partition store.

mod index;
mod payload;
pub mod row;
mod source;
mod state;
mod store;

use std::collections::BTreeSet;

use rayon::prelude::*;

pub use index::{parse_master_index, parse_payload_timestamp, payload_file_name, plan_import, MasterIndex, PayloadRef, EXPORT_SUFFIX};
pub use payload::{
    decode_checked, decode_payload, import_payload, md5_hex, parse_rows, ImportOptions, PayloadBatch, PayloadError,
};
pub use row::{format_event_row, parse_event_row, parse_store_row, EventRecord, RowError};
#[cfg(feature = "http")]
pub use source::HttpSource;
pub use source::{LocalDirSource, PayloadSource, SourceError, MASTER_INDEX_FILE};
pub use state::{ImportState, RowStats, StateError, STATE_FILE};
pub use store::{encode_shard, read_country, shard_path, PartitionStore, PartitionSummary, ShardKey, StoreError};

use crate::country::CountryCode;

#[derive(Debug, thiserror::Error)]
pub enum ImportError {
    #[error(transparent)]
    Source(#[from] SourceError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Outcome of one import run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ImportReport {
    pub planned: usize,
    pub imported: usize,
    pub failed: usize,
    pub index_malformed: usize,
    pub lines: usize,
    pub malformed: usize,
    pub partition: PartitionSummary,
}

/// Imports every payload newer than `state` from `source` into `store`.
///
/// Payloads are fetched and decoded in parallel when `parallel` is set, then
/// applied to the state and store one at a time in timestamp order, so the
/// result does not depend on worker count. A fetch failure stops the run after
/// the payloads before it have been applied; corrupt payloads are skipped.
/// The store is finalized before returning.
pub fn run_import(
    source: &dyn PayloadSource,
    state: &mut ImportState,
    store: &mut PartitionStore,
    countries: &BTreeSet<CountryCode>,
    opts: ImportOptions,
    parallel: bool,
) -> Result<ImportReport, ImportError> {
    let index = parse_master_index(&source.master_index()?);
    let plan = plan_import(&index.refs, state);
    let mut report = ImportReport { planned: plan.len(), index_malformed: index.malformed_lines, ..Default::default() };

    let decode = |payload: &PayloadRef| -> Result<Result<PayloadBatch, PayloadError>, SourceError> {
        let bytes = source.fetch(payload)?;
        Ok(decode_checked(&bytes, payload, opts))
    };
    let outcomes: Vec<_> = if parallel {
        plan.par_iter().map(decode).collect()
    } else {
        plan.iter().map(decode).collect()
    };

    let mut fetch_error = None;
    for (payload, outcome) in plan.iter().zip(outcomes) {
        let outcome = match outcome {
            Ok(outcome) => outcome,
            Err(e) => {
                fetch_error = Some(e);
                break;
            }
        };
        state.apply_payload(payload, &outcome);
        let Ok(batch) = outcome else {
            log::warn!("stage=import payload={} status=skipped", payload.file_name());
            report.failed += 1;
            continue;
        };
        report.imported += 1;
        report.lines += batch.lines;
        report.malformed += batch.malformed;
        let summary = store.partition_events(batch.records, countries)?;
        state.row_stats.out_of_scope += summary.dropped as u64;
        report.partition.merge(&summary);
    }
    store.finalize()?;
    match fetch_error {
        Some(e) => Err(e.into()),
        None => Ok(report),
    }
}
