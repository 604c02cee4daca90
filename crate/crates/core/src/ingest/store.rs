//! Per-country, per-year partition store.
//!
//! Shards live at `<root>/<country>/<year>.tsv`. Appends are staged in memory
//! and become visible on disk only through [`PartitionStore::finalize`], which
//! sorts each touched shard by `(day, global_event_id)` and replaces its file
//! atomically.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::{Path, PathBuf};
use std::{fs, io};

use super::row::{parse_store_row, write_event_row, EventRecord, STORE_HEADER};
use crate::country::CountryCode;
use crate::fsutil::write_atomic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ShardKey {
    pub country: CountryCode,
    pub year: i32,
}

#[derive(Debug, Default)]
struct Shard {
    rows: Vec<EventRecord>,
    ids: HashSet<u64>,
    dirty: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PartitionSummary {
    pub appended: BTreeMap<ShardKey, usize>,
    /// Records with an absent action country or one outside the configured set.
    pub dropped: usize,
    /// Records whose id was already present in the target shard.
    pub duplicates: usize,
}

impl PartitionSummary {
    pub fn total_appended(&self) -> usize {
        self.appended.values().sum()
    }

    pub fn merge(&mut self, other: &PartitionSummary) {
        for (key, n) in &other.appended {
            *self.appended.entry(*key).or_default() += n;
        }
        self.dropped += other.dropped;
        self.duplicates += other.duplicates;
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("store write failed for {path}: {source}")]
    StoreWriteFailure { path: PathBuf, source: io::Error },
    #[error("store read failed for {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("{path}:{line}: corrupt store row: {reason}")]
    CorruptRow { path: PathBuf, line: usize, reason: String },
    #[error("partition called with an empty country set")]
    NoCountries,
}

#[derive(Debug, Default)]
pub struct PartitionStore {
    root: Option<PathBuf>,
    shards: BTreeMap<ShardKey, Shard>,
}

pub fn shard_path(root: &Path, key: ShardKey) -> PathBuf {
    root.join(key.country.as_str()).join(format!("{}.tsv", key.year))
}

fn read_shard_file(path: &Path) -> Result<Vec<EventRecord>, StoreError> {
    let text = match fs::read_to_string(path) {
        Ok(text) => text,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(source) => return Err(StoreError::Read { path: path.to_path_buf(), source }),
    };
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.is_empty() {
            continue;
        }
        let record = parse_store_row(line).map_err(|e| StoreError::CorruptRow {
            path: path.to_path_buf(),
            line: i + 1,
            reason: e.to_string(),
        })?;
        rows.push(record);
    }
    Ok(rows)
}

/// Serializes a shard in store format, header first.
pub fn encode_shard(rows: &[EventRecord]) -> String {
    let mut out = String::with_capacity(rows.len() * 64 + STORE_HEADER.len() + 1);
    out.push_str(STORE_HEADER);
    out.push('\n');
    for row in rows {
        write_event_row(&mut out, row);
        out.push('\n');
    }
    out
}

impl PartitionStore {
    /// A store that never touches disk.
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// A store rooted at `root`; existing shards are loaded on first use.
    pub fn open(root: impl Into<PathBuf>) -> Self {
        PartitionStore { root: Some(root.into()), shards: BTreeMap::new() }
    }

    pub fn root(&self) -> Option<&Path> {
        self.root.as_deref()
    }

    fn ensure_loaded(&mut self, key: ShardKey) -> Result<(), StoreError> {
        if self.shards.contains_key(&key) {
            return Ok(());
        }
        let rows = match &self.root {
            Some(root) => read_shard_file(&shard_path(root, key))?,
            None => Vec::new(),
        };
        let ids = rows.iter().map(|r| r.global_event_id).collect();
        self.shards.insert(key, Shard { rows, ids, dirty: false });
        Ok(())
    }

    /// Routes each record to its `(action_country, year)` shard.
    ///
    /// Every shard the batch touches is loaded before anything is appended, so a
    /// failure leaves the store exactly as it was. The first occurrence of a
    /// `global_event_id` within a shard wins.
    pub fn partition_events(
        &mut self,
        records: Vec<EventRecord>,
        countries: &BTreeSet<CountryCode>,
    ) -> Result<PartitionSummary, StoreError> {
        if countries.is_empty() {
            return Err(StoreError::NoCountries);
        }
        let mut summary = PartitionSummary::default();
        let mut keys = BTreeSet::new();
        for record in &records {
            match record.action_country {
                Some(c) if countries.contains(&c) => {
                    keys.insert(ShardKey { country: c, year: record.year() });
                }
                _ => {}
            }
        }
        for key in &keys {
            self.ensure_loaded(*key)?;
        }
        for record in records {
            let country = match record.action_country {
                Some(c) if countries.contains(&c) => c,
                _ => {
                    summary.dropped += 1;
                    continue;
                }
            };
            let key = ShardKey { country, year: record.year() };
            let shard = self.shards.get_mut(&key).expect("shard loaded above");
            if shard.ids.insert(record.global_event_id) {
                shard.rows.push(record);
                shard.dirty = true;
                *summary.appended.entry(key).or_default() += 1;
            } else {
                summary.duplicates += 1;
            }
        }
        Ok(summary)
    }

    /// Sorts touched shards and, for on-disk stores, writes them out.
    pub fn finalize(&mut self) -> Result<(), StoreError> {
        for (key, shard) in self.shards.iter_mut() {
            if !shard.dirty {
                continue;
            }
            shard.rows.sort_by(|a, b| (a.day, a.global_event_id).cmp(&(b.day, b.global_event_id)));
            if let Some(root) = &self.root {
                let path = shard_path(root, *key);
                write_atomic(&path, encode_shard(&shard.rows).as_bytes())
                    .map_err(|source| StoreError::StoreWriteFailure { path, source })?;
            }
            shard.dirty = false;
        }
        Ok(())
    }

    pub fn shard(&self, key: ShardKey) -> Option<&[EventRecord]> {
        self.shards.get(&key).map(|s| s.rows.as_slice())
    }

    pub fn shard_keys(&self) -> impl Iterator<Item = ShardKey> + '_ {
        self.shards.keys().copied()
    }

    /// All loaded rows for `country`, ascending by year.
    pub fn country_rows(&self, country: CountryCode) -> Vec<EventRecord> {
        self.shards
            .iter()
            .filter(|(k, _)| k.country == country)
            .flat_map(|(_, s)| s.rows.iter().cloned())
            .collect()
    }
}

/// Reads every year file for `country` under `root`, ascending by year.
/// Returns `None` when the country has no directory.
pub fn read_country(root: &Path, country: CountryCode) -> Result<Option<Vec<EventRecord>>, StoreError> {
    let dir = root.join(country.as_str());
    let entries = match fs::read_dir(&dir) {
        Ok(entries) => entries,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
        Err(source) => return Err(StoreError::Read { path: dir, source }),
    };
    let mut years = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| StoreError::Read { path: dir.clone(), source })?;
        let name = entry.file_name();
        let Some(year) = name.to_str().and_then(|n| n.strip_suffix(".tsv")).and_then(|y| y.parse::<i32>().ok())
        else {
            continue;
        };
        years.push(year);
    }
    years.sort_unstable();
    let mut rows = Vec::new();
    for year in years {
        rows.extend(read_shard_file(&shard_path(root, ShardKey { country, year }))?);
    }
    Ok(Some(rows))
}

#[cfg(test)]
mod tests {
    use chrono::NaiveDate;

    use super::*;

    fn rec(id: u64, country: &str, day: (i32, u32, u32)) -> EventRecord {
        let date = NaiveDate::from_ymd_opt(day.0, day.1, day.2).unwrap();
        EventRecord {
            global_event_id: id,
            day: date,
            month_year: day.0 as u32 * 100 + day.1,
            actor1_type: None,
            actor2_type: None,
            event_root_code: 14,
            goldstein_scale: Some(-6.5),
            avg_tone: None,
            action_country: (!country.is_empty()).then(|| country.parse().unwrap()),
        }
    }

    fn set(codes: &[&str]) -> BTreeSet<CountryCode> {
        codes.iter().map(|c| c.parse().unwrap()).collect()
    }

    #[test]
    fn routes_by_country_and_year() {
        let mut store = PartitionStore::in_memory();
        let records = vec![
            rec(1, "PK", (2019, 1, 1)),
            rec(2, "PK", (2019, 1, 2)),
            rec(3, "PK", (2018, 12, 31)),
            rec(4, "EG", (2019, 1, 1)),
            rec(5, "EG", (2019, 1, 1)),
        ];
        let summary = store.partition_events(records, &set(&["PK", "EG"])).unwrap();
        let pk: CountryCode = "PK".parse().unwrap();
        let eg: CountryCode = "EG".parse().unwrap();
        assert_eq!(summary.appended[&ShardKey { country: pk, year: 2019 }], 2);
        assert_eq!(summary.appended[&ShardKey { country: pk, year: 2018 }], 1);
        assert_eq!(summary.appended[&ShardKey { country: eg, year: 2019 }], 2);
        assert_eq!(summary.dropped, 0);
        assert_eq!(store.country_rows(pk).len(), 3);
    }

    #[test]
    fn other_and_absent_countries_are_dropped() {
        let mut store = PartitionStore::in_memory();
        let summary = store
            .partition_events(vec![rec(1, "FR", (2019, 1, 1)), rec(2, "", (2019, 1, 1))], &set(&["PK"]))
            .unwrap();
        assert_eq!(summary.dropped, 2);
        assert_eq!(summary.total_appended(), 0);
    }

    #[test]
    fn duplicate_id_written_once_first_wins() {
        let mut store = PartitionStore::in_memory();
        let mut second = rec(7, "PK", (2019, 1, 1));
        second.goldstein_scale = Some(1.0);
        store.partition_events(vec![rec(7, "PK", (2019, 1, 1))], &set(&["PK"])).unwrap();
        let summary = store.partition_events(vec![second], &set(&["PK"])).unwrap();
        assert_eq!(summary.duplicates, 1);
        let rows = store.country_rows("PK".parse().unwrap());
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].goldstein_scale, Some(-6.5));
    }

    #[test]
    fn empty_country_set_is_rejected() {
        let mut store = PartitionStore::in_memory();
        assert!(matches!(store.partition_events(vec![], &BTreeSet::new()), Err(StoreError::NoCountries)));
    }

    #[test]
    fn finalize_sorts_and_persists() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = PartitionStore::open(dir.path());
        store
            .partition_events(
                vec![rec(9, "PK", (2019, 1, 2)), rec(3, "PK", (2019, 1, 2)), rec(5, "PK", (2019, 1, 1))],
                &set(&["PK"]),
            )
            .unwrap();
        store.finalize().unwrap();
        let pk = "PK".parse().unwrap();
        let rows = read_country(dir.path(), pk).unwrap().unwrap();
        let ids: Vec<u64> = rows.iter().map(|r| r.global_event_id).collect();
        assert_eq!(ids, vec![5, 3, 9]);

        // a reopened store dedups against what is already on disk
        let mut reopened = PartitionStore::open(dir.path());
        let summary = reopened.partition_events(vec![rec(3, "PK", (2019, 1, 2))], &set(&["PK"])).unwrap();
        assert_eq!(summary.duplicates, 1);
        assert!(read_country(dir.path(), "EG".parse().unwrap()).unwrap().is_none());
    }

    #[test]
    fn failed_load_leaves_store_untouched() {
        let dir = tempfile::tempdir().unwrap();
        let pk: CountryCode = "PK".parse().unwrap();
        let bad = shard_path(dir.path(), ShardKey { country: pk, year: 2019 });
        fs::create_dir_all(bad.parent().unwrap()).unwrap();
        fs::write(&bad, format!("{STORE_HEADER}\ngarbage\n")).unwrap();
        let mut store = PartitionStore::open(dir.path());
        let batch = vec![rec(1, "PK", (2018, 5, 5)), rec(2, "PK", (2019, 5, 5))];
        assert!(store.partition_events(batch, &set(&["PK"])).is_err());
        assert!(store.country_rows(pk).is_empty());
    }
}
