//! Seeded synthetic GDELT corpora with planted unrest spikes and known labels.
//!
//! Each day gets a Poisson number of protest events (root code 14) at the base
//! rate, scaled by a spike multiplier on spike days, plus a few background
//! events of another root code so that every calendar day appears in the data.
//! Days are bundled into one zipped export payload each, listed in a master
//! index, so the corpus can be fed to the importer unchanged.

mod oracle;
mod roundtrip;
mod suite;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Cursor, Write as _};
use std::path::Path;

use chrono::{Datelike, Days, NaiveDate, NaiveTime, TimeZone, Timelike, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

pub use oracle::{oracle_labels, OracleError, OracleInterval};
pub use suite::SuiteConfig;
pub use roundtrip::{check_round_trip, round_trip_check, RoundTripError, RoundTripMismatch};

use crate::country::CountryCode;
use crate::features::FeatureConfig;
use crate::fsutil::write_atomic;
use crate::ingest::row::EXPORT_COLUMNS;
use crate::ingest::{md5_hex, payload_file_name, PayloadRef, PayloadSource, SourceError, MASTER_INDEX_FILE};

const URL_BASE: &str = "http://data.gdeltproject.org/gdeltv2/";
pub const DEFAULT_FIRST_EVENT_ID: u64 = 410_000_000;

fn default_first_event_id() -> u64 {
    DEFAULT_FIRST_EVENT_ID
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spike {
    pub start_day: usize,
    pub length_days: usize,
    pub multiplier: f64,
}

impl Spike {
    pub fn contains(&self, day: usize) -> bool {
        (self.start_day..self.start_day + self.length_days).contains(&day)
    }
}

/// Normal distributions for tone and Goldstein score in one regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub tone_mean: f64,
    pub tone_std: f64,
    pub goldstein_mean: f64,
    pub goldstein_std: f64,
}

impl Regime {
    pub const CALM: Regime = Regime { tone_mean: -2.0, tone_std: 1.5, goldstein_mean: -6.5, goldstein_std: 0.5 };
    pub const UNREST: Regime = Regime { tone_mean: -5.0, tone_std: 2.0, goldstein_mean: -7.5, goldstein_std: 1.0 };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub country: CountryCode,
    /// Date of day 0.
    pub start: NaiveDate,
    pub n_days: usize,
    /// Mean protest events per calm day.
    pub base_rate: f64,
    pub spikes: Vec<Spike>,
    pub calm: Regime,
    pub unrest: Regime,
    /// Non-protest events emitted every day.
    pub background_per_day: u32,
    pub seed: u64,
    /// Id of the first generated event; later events count up from it.
    #[serde(default = "default_first_event_id")]
    pub first_event_id: u64,
}

impl SynthSpec {
    /// A spike-free spec with default regimes and one background event per day.
    pub fn new(country: CountryCode, start: NaiveDate, n_days: usize, base_rate: f64, seed: u64) -> Self {
        SynthSpec {
            country,
            start,
            n_days,
            base_rate,
            spikes: Vec::new(),
            calm: Regime::CALM,
            unrest: Regime::UNREST,
            background_per_day: 1,
            seed,
            first_event_id: DEFAULT_FIRST_EVENT_ID,
        }
    }

    pub fn with_spike(mut self, start_day: usize, length_days: usize, multiplier: f64) -> Self {
        self.spikes.push(Spike { start_day, length_days, multiplier });
        self
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |msg: String| Err(SynthError::InvalidSpec(msg));
        if !(self.base_rate.is_finite() && self.base_rate >= 0.0) {
            return bad(format!("base rate must be finite and non-negative, got {}", self.base_rate));
        }
        for r in [self.calm, self.unrest] {
            let params = [r.tone_mean, r.tone_std, r.goldstein_mean, r.goldstein_std];
            if params.iter().any(|v| !v.is_finite()) || r.tone_std < 0.0 || r.goldstein_std < 0.0 {
                return bad(format!("invalid regime {r:?}"));
            }
        }
        if self.n_days > 0 && self.start.checked_add_days(Days::new(self.n_days as u64)).is_none() {
            return bad("date range overflows".into());
        }
        let mut spikes = self.spikes.clone();
        spikes.sort_by_key(|s| s.start_day);
        for s in &spikes {
            if !(s.multiplier > 1.0 && s.multiplier.is_finite()) {
                return bad(format!("spike multiplier must exceed 1, got {}", s.multiplier));
            }
            if s.length_days == 0 || s.start_day + s.length_days > self.n_days {
                return bad(format!("spike {s:?} does not fit in {} days", self.n_days));
            }
        }
        if let Some(pair) = spikes.windows(2).find(|p| p[0].start_day + p[0].length_days > p[1].start_day) {
            return bad(format!("spikes {:?} and {:?} overlap", pair[0], pair[1]));
        }
        Ok(())
    }

    /// Checks that no spike starts before the warm-up of `cfg` has passed.
    pub fn validate_for(&self, cfg: &FeatureConfig) -> Result<(), SynthError> {
        self.validate()?;
        let earliest = cfg.window + cfg.max_lag;
        match self.spikes.iter().find(|s| s.start_day < earliest) {
            Some(s) => Err(SynthError::InvalidSpec(format!("spike at day {} starts inside the warm-up (< {earliest})", s.start_day))),
            None => Ok(()),
        }
    }

    pub fn date(&self, day: usize) -> NaiveDate {
        self.start + Days::new(day as u64)
    }

    pub fn multiplier(&self, day: usize) -> f64 {
        self.spikes.iter().find(|s| s.contains(day)).map_or(1.0, |s| s.multiplier)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("writing corpus: {0}")]
    Io(#[from] std::io::Error),
}

/// Per-interval labels from the oracle, keyed by interval index.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundTruth {
    pub intervals: Vec<OracleInterval>,
}

impl GroundTruth {
    pub fn labels(&self) -> Vec<u8> {
        self.intervals.iter().map(|iv| iv.label).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("interval_index,label\n");
        for iv in &self.intervals {
            let _ = writeln!(out, "{},{}", iv.index, iv.label);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthPayload {
    pub payload: PayloadRef,
    pub bytes: Vec<u8>,
}

/// A generated corpus: payloads in timestamp order, true daily protest counts and labels.
#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub spec: SynthSpec,
    pub payloads: Vec<SynthPayload>,
    pub counts: Vec<u32>,
    pub truth: GroundTruth,
}

impl SynthCorpus {
    /// Master index text in the `size md5 url` layout.
    pub fn master_index(&self) -> String {
        index_text(&self.payloads)
    }

    /// Planted protest events; the per-day background rows are not counted.
    pub fn total_events(&self) -> u64 {
        self.counts.iter().map(|&c| u64::from(c)).sum()
    }

    /// Replaces payload `i` with an archive of `text`, updating size and checksum.
    pub fn replace_payload_text(&mut self, i: usize, text: &str) {
        let p = &mut self.payloads[i];
        let member = p.payload.file_name().trim_end_matches(".zip").to_string();
        p.bytes = zip_single(&member, text.as_bytes(), p.payload.timestamp);
        p.payload.size_bytes = p.bytes.len() as u64;
        p.payload.checksum = md5_hex(&p.bytes);
    }

    /// Writes the master index, every payload and `ground_truth.csv` to `dir`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<(), SynthError> {
        for p in &self.payloads {
            write_atomic(&dir.join(p.payload.file_name()), &p.bytes)?;
        }
        write_atomic(&dir.join(GROUND_TRUTH_FILE), self.truth.to_csv().as_bytes())?;
        write_atomic(&dir.join(MASTER_INDEX_FILE), self.master_index().as_bytes())?;
        Ok(())
    }
}

fn index_text(payloads: &[SynthPayload]) -> String {
    let mut out = String::new();
    for p in payloads {
        let _ = writeln!(out, "{} {} {}", p.payload.size_bytes, p.payload.checksum, p.payload.url);
    }
    out
}

fn fetch_from(payloads: &[SynthPayload], payload: &PayloadRef) -> Result<Vec<u8>, SourceError> {
    payloads
        .iter()
        .find(|p| p.payload.url == payload.url)
        .map(|p| p.bytes.clone())
        .ok_or_else(|| SourceError::Http { url: payload.url.clone(), reason: "not in synthetic corpus".into() })
}

fn make_payload(timestamp: chrono::DateTime<Utc>, text: &str) -> SynthPayload {
    let name = payload_file_name(timestamp);
    let bytes = zip_single(name.trim_end_matches(".zip"), text.as_bytes(), timestamp);
    SynthPayload {
        payload: PayloadRef { size_bytes: bytes.len() as u64, checksum: md5_hex(&bytes), url: format!("{URL_BASE}{name}"), timestamp },
        bytes,
    }
}

/// Payloads of several corpora merged by timestamp, for multi-country mirrors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PayloadSet {
    pub payloads: Vec<SynthPayload>,
}

impl PayloadSet {
    /// Concatenates same-timestamp payloads in corpus order. Event ids must
    /// not collide across corpora (see [`SynthSpec::first_event_id`]).
    pub fn merge(corpora: &[SynthCorpus]) -> Result<Self, SynthError> {
        let mut texts: BTreeMap<chrono::DateTime<Utc>, String> = BTreeMap::new();
        for corpus in corpora {
            for p in &corpus.payloads {
                texts.entry(p.payload.timestamp).or_default().push_str(&unzip_single(&p.bytes)?);
            }
        }
        Ok(PayloadSet { payloads: texts.iter().map(|(&ts, text)| make_payload(ts, text)).collect() })
    }

    pub fn master_index(&self) -> String {
        index_text(&self.payloads)
    }

    /// Writes every payload, then the master index.
    pub fn write_to_dir(&self, dir: &Path) -> Result<(), SynthError> {
        for p in &self.payloads {
            write_atomic(&dir.join(p.payload.file_name()), &p.bytes)?;
        }
        write_atomic(&dir.join(MASTER_INDEX_FILE), self.master_index().as_bytes())?;
        Ok(())
    }
}

impl PayloadSource for PayloadSet {
    fn master_index(&self) -> Result<String, SourceError> {
        Ok(PayloadSet::master_index(self))
    }

    fn fetch(&self, payload: &PayloadRef) -> Result<Vec<u8>, SourceError> {
        fetch_from(&self.payloads, payload)
    }

    fn describe(&self) -> String {
        format!("merged synthetic corpus ({} payloads)", self.payloads.len())
    }
}

pub const GROUND_TRUTH_FILE: &str = "ground_truth.csv";

impl PayloadSource for SynthCorpus {
    fn master_index(&self) -> Result<String, SourceError> {
        Ok(SynthCorpus::master_index(self))
    }

    fn fetch(&self, payload: &PayloadRef) -> Result<Vec<u8>, SourceError> {
        fetch_from(&self.payloads, payload)
    }

    fn describe(&self) -> String {
        format!("synthetic {} corpus (seed {})", self.spec.country, self.spec.seed)
    }
}

/// A single-member deflated zip with a fixed entry time.
pub fn zip_single(member: &str, contents: &[u8], timestamp: chrono::DateTime<Utc>) -> Vec<u8> {
    let mtime = zip::DateTime::from_date_and_time(
        timestamp.year().clamp(1980, 2107) as u16,
        timestamp.month() as u8,
        timestamp.day() as u8,
        timestamp.hour() as u8,
        timestamp.minute() as u8,
        timestamp.second() as u8,
    )
    .unwrap_or_default();
    let options = zip::write::SimpleFileOptions::default()
        .compression_method(zip::CompressionMethod::Deflated)
        .last_modified_time(mtime)
        .unix_permissions(0o644);
    let mut writer = zip::ZipWriter::new(Cursor::new(Vec::new()));
    writer.start_file(member, options).expect("in-memory zip");
    writer.write_all(contents).expect("in-memory zip");
    writer.finish().expect("in-memory zip").into_inner()
}

/// Contents of a single-member zip as text.
pub fn unzip_single(bytes: &[u8]) -> std::io::Result<String> {
    let mut archive = zip::ZipArchive::new(Cursor::new(bytes))?;
    let mut text = String::new();
    std::io::Read::read_to_string(&mut archive.by_index(0)?, &mut text)?;
    Ok(text)
}

struct RowWriter<'a> {
    spec: &'a SynthSpec,
    fields: Vec<String>,
}

impl<'a> RowWriter<'a> {
    fn new(spec: &'a SynthSpec) -> Self {
        RowWriter { spec, fields: vec![String::new(); EXPORT_COLUMNS] }
    }

    /// Renders one full export row; `event` is (base code, root code, quad class).
    #[allow(clippy::too_many_arguments)]
    fn write(
        &mut self,
        out: &mut String,
        id: u64,
        day: NaiveDate,
        stamp: &str,
        event: (&str, u8, u8),
        actor1: &str,
        goldstein: f64,
        tone: f64,
    ) {
        use crate::ingest::row::col;
        let cc = self.spec.country.as_str();
        let f = &mut self.fields;
        for s in f.iter_mut() {
            s.clear();
        }
        let _ = write!(f[col::GLOBAL_EVENT_ID], "{id}");
        let _ = write!(f[col::DAY], "{}", day.format("%Y%m%d"));
        let _ = write!(f[col::MONTH_YEAR], "{}", day.format("%Y%m"));
        let _ = write!(f[col::YEAR], "{}", day.year());
        let _ = write!(f[col::FRACTION_DATE], "{:.4}", day.year() as f64 + f64::from(day.ordinal0()) / 365.0);
        f[5].push_str(cc);
        f[6].push_str(cc);
        f[7].push_str(cc);
        f[col::ACTOR1_TYPE1].push_str(actor1);
        f[15].push_str(cc);
        f[16].push_str("GOV");
        f[col::ACTOR2_TYPE1].push_str("GOV");
        f[col::IS_ROOT_EVENT].push('1');
        f[col::EVENT_CODE].push_str(event.0);
        f[col::EVENT_BASE_CODE].push_str(event.0);
        let _ = write!(f[col::EVENT_ROOT_CODE], "{:02}", event.1);
        let _ = write!(f[col::QUAD_CLASS], "{}", event.2);
        let _ = write!(f[col::GOLDSTEIN_SCALE], "{goldstein:.1}");
        f[col::NUM_MENTIONS].push('4');
        f[col::NUM_SOURCES].push('1');
        f[col::NUM_ARTICLES].push('4');
        let _ = write!(f[col::AVG_TONE], "{tone:.6}");
        f[col::ACTION_GEO_TYPE].push('1');
        f[52].push_str(cc);
        f[col::ACTION_GEO_COUNTRY].push_str(cc);
        f[56].push('0');
        f[57].push('0');
        f[58].push_str(cc);
        f[col::DATE_ADDED].push_str(stamp);
        let _ = write!(f[col::SOURCE_URL], "https://news.example.org/{}/{id}", cc.to_ascii_lowercase());
        out.push_str(&f.join("\t"));
        out.push('\n');
    }
}

fn sample_normal(rng: &mut ChaCha8Rng, mean: f64, std: f64) -> f64 {
    if std == 0.0 {
        return mean;
    }
    Normal::new(mean, std).expect("validated regime").sample(rng)
}

/// Generates the corpus described by `spec` and labels it with the oracle under `cfg`.
///
/// Corpora too short for a single interval get empty ground truth.
pub fn generate(spec: &SynthSpec, cfg: &FeatureConfig) -> Result<SynthCorpus, SynthError> {
    spec.validate_for(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut writer = RowWriter::new(spec);
    let mut next_id = spec.first_event_id;
    let mut counts = Vec::with_capacity(spec.n_days);
    let mut payloads = Vec::with_capacity(spec.n_days);
    let publish = NaiveTime::from_hms_opt(23, 45, 0).expect("valid time");

    for day in 0..spec.n_days {
        let date = spec.date(day);
        let timestamp = Utc.from_utc_datetime(&date.and_time(publish));
        let stamp = timestamp.format("%Y%m%d%H%M%S").to_string();
        let multiplier = spec.multiplier(day);
        let regime = if multiplier > 1.0 { spec.unrest } else { spec.calm };
        let rate = spec.base_rate * multiplier;
        let n = if rate > 0.0 { Poisson::new(rate).expect("positive rate").sample(&mut rng) as u32 } else { 0 };
        counts.push(n);

        let mut text = String::new();
        for _ in 0..spec.background_per_day {
            let tone = sample_normal(&mut rng, 1.0, 1.0);
            writer.write(&mut text, next_id, date, &stamp, ("010", 1, 1), "GOV", 0.0, tone);
            next_id += 1;
        }
        for _ in 0..n {
            let tone = sample_normal(&mut rng, regime.tone_mean, regime.tone_std);
            let goldstein = sample_normal(&mut rng, regime.goldstein_mean, regime.goldstein_std).clamp(-10.0, 10.0);
            let actor = if rng.random_bool(0.7) { "CVL" } else { "OPP" };
            writer.write(&mut text, next_id, date, &stamp, ("141", 14, 3), actor, goldstein, tone);
            next_id += 1;
        }

        payloads.push(make_payload(timestamp, &text));
    }

    let truth = match oracle_labels(&counts, cfg, cfg.delta) {
        Ok(intervals) => GroundTruth { intervals },
        Err(OracleError::InsufficientHistory { .. }) => GroundTruth::default(),
    };
    Ok(SynthCorpus { spec: spec.clone(), payloads, counts, truth })
}
