//! Pipeline configuration: one TOML file of flat dotted keys plus
//! `UNREST_`-prefixed environment overrides (`__` stands for `.`).

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use toml::Value;
use unrest::features::FeatureConfig;
use unrest::labeling::{LabelStat, SplitSpec};
use unrest::models::{Hyperparams, ModelKind};
use unrest::CountryCode;

pub const ENV_PREFIX: &str = "UNREST_";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config file {0} does not exist")]
    MissingFile(PathBuf),
    #[error("reading config {path}: {reason}")]
    Read { path: PathBuf, reason: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {reason}")]
    InvalidValue { key: String, reason: String },
}

/// Where raw payloads come from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "location", rename_all = "snake_case")]
pub enum SourceSpec {
    Local(PathBuf),
    Http(String),
}

impl SourceSpec {
    pub fn parse(raw: &str) -> SourceSpec {
        if raw.starts_with("http://") || raw.starts_with("https://") {
            SourceSpec::Http(raw.to_string())
        } else {
            SourceSpec::Local(PathBuf::from(raw))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthSettings {
    pub start: String,
    pub end: String,
    pub spike_spacing: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub countries: Vec<CountryCode>,
    pub store_root: PathBuf,
    pub source: SourceSpec,
    pub seed: u64,
    pub features: FeatureConfig,
    pub label_stat: LabelStat,
    pub split: SplitSpec,
    pub kinds: Vec<ModelKind>,
    pub hyperparams: Hyperparams,
    pub verify_checksums: bool,
    pub synth: SynthSettings,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            countries: ["PK", "EG", "SU"].iter().map(|c| c.parse().expect("valid code")).collect(),
            store_root: PathBuf::from("data"),
            source: SourceSpec::Local(PathBuf::from("data/mirror")),
            seed: 42,
            features: FeatureConfig::default(),
            label_stat: LabelStat::ThetaMargin,
            split: SplitSpec::default(),
            kinds: ModelKind::ALL.to_vec(),
            hyperparams: Hyperparams::default(),
            verify_checksums: true,
            synth: SynthSettings { start: "2014-09-01".into(), end: "2020-12-31".into(), spike_spacing: 40 },
        }
    }
}

/// Every accepted key, in documentation order.
#[cfg(test)]
pub const KEYS: &[&str] = &[
    "countries",
    "store_root",
    "source",
    "seed",
    "window",
    "interval",
    "max_lag",
    "z",
    "root_codes",
    "delta",
    "label.stat",
    "split.train_years",
    "split.test_years",
    "split.discard_years",
    "models.kinds",
    "forest.n_trees",
    "forest.max_depth",
    "forest.min_leaf",
    "forest.features_per_split",
    "forest.bootstrap",
    "tree.max_depth",
    "tree.min_leaf",
    "gaussian_nb.var_floor",
    "linear_svm.lambda",
    "linear_svm.epochs",
    "knn.k",
    "mlp.hidden",
    "mlp.learning_rate",
    "mlp.epochs",
    "mlp.init_scale",
    "import.verify_checksums",
    "synth.start",
    "synth.end",
    "synth.spike_spacing",
];

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(inner) => flatten(&key, inner, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

/// Reads an override value as TOML, falling back to a plain string.
fn env_value(raw: &str) -> Value {
    match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(raw.to_string())),
        Err(_) => Value::String(raw.to_string()),
    }
}

/// Loads `path` (defaults only when `None`), then applies environment overrides from `env`.
pub fn load_config(
    path: Option<&Path>,
    env: impl IntoIterator<Item = (String, String)>,
) -> Result<PipelineConfig, ConfigError> {
    let mut values = BTreeMap::new();
    if let Some(path) = path {
        let text = match fs::read_to_string(path) {
            Ok(text) => text,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(ConfigError::MissingFile(path.into())),
            Err(e) => return Err(ConfigError::Read { path: path.into(), reason: e.to_string() }),
        };
        let table: toml::Table =
            text.parse().map_err(|e: toml::de::Error| ConfigError::Read { path: path.into(), reason: e.to_string() })?;
        flatten("", &table, &mut values);
    }
    for (name, raw) in env {
        if let Some(rest) = name.strip_prefix(ENV_PREFIX) {
            values.insert(rest.to_ascii_lowercase().replace("__", "."), env_value(&raw));
        }
    }
    from_values(&values)
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue { key: key.to_string(), reason: reason.into() }
}

fn as_int(key: &str, v: &Value) -> Result<i64, ConfigError> {
    v.as_integer().ok_or_else(|| invalid(key, format!("expected an integer, got {v}")))
}

fn as_count(key: &str, v: &Value, min: i64) -> Result<usize, ConfigError> {
    let n = as_int(key, v)?;
    if n < min {
        return Err(invalid(key, format!("must be at least {min}, got {n}")));
    }
    usize::try_from(n).map_err(|_| invalid(key, "out of range"))
}

fn as_float(key: &str, v: &Value) -> Result<f64, ConfigError> {
    match v {
        Value::Float(f) if f.is_finite() => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(invalid(key, format!("expected a finite number, got {v}"))),
    }
}

fn as_positive(key: &str, v: &Value) -> Result<f64, ConfigError> {
    let f = as_float(key, v)?;
    if f <= 0.0 {
        return Err(invalid(key, format!("must be positive, got {f}")));
    }
    Ok(f)
}

fn as_str<'a>(key: &str, v: &'a Value) -> Result<&'a str, ConfigError> {
    v.as_str().ok_or_else(|| invalid(key, format!("expected a string, got {v}")))
}

fn as_array<'a>(key: &str, v: &'a Value) -> Result<&'a [Value], ConfigError> {
    v.as_array().map(Vec::as_slice).ok_or_else(|| invalid(key, format!("expected an array, got {v}")))
}

fn as_years(key: &str, v: &Value) -> Result<BTreeSet<i32>, ConfigError> {
    as_array(key, v)?
        .iter()
        .map(|y| as_int(key, y).and_then(|y| i32::try_from(y).map_err(|_| invalid(key, "year out of range"))))
        .collect()
}

fn from_values(values: &BTreeMap<String, Value>) -> Result<PipelineConfig, ConfigError> {
    let mut cfg = PipelineConfig::default();
    let hp = &mut cfg.hyperparams;
    for (key, v) in values {
        let k = key.as_str();
        match k {
            "countries" => {
                cfg.countries = as_array(k, v)?
                    .iter()
                    .map(|c| as_str(k, c)?.parse::<CountryCode>().map_err(|e| invalid(k, e.to_string())))
                    .collect::<Result<_, _>>()?;
                if cfg.countries.is_empty() {
                    return Err(invalid(k, "at least one country is required"));
                }
            }
            "store_root" => cfg.store_root = PathBuf::from(as_str(k, v)?),
            "source" => cfg.source = SourceSpec::parse(as_str(k, v)?),
            "seed" => cfg.seed = u64::try_from(as_int(k, v)?).map_err(|_| invalid(k, "must be non-negative"))?,
            "window" => cfg.features.window = as_count(k, v, 1)?,
            "interval" => cfg.features.interval = as_count(k, v, 0)?,
            "max_lag" => cfg.features.max_lag = as_count(k, v, 0)?,
            "z" => cfg.features.z = as_float(k, v)?,
            "root_codes" => {
                cfg.features.root_codes = as_array(k, v)?
                    .iter()
                    .map(|c| as_int(k, c).and_then(|c| u8::try_from(c).map_err(|_| invalid(k, "root code out of range"))))
                    .collect::<Result<_, _>>()?;
            }
            "delta" => cfg.features.delta = as_float(k, v)?,
            "label.stat" => cfg.label_stat = as_str(k, v)?.parse().map_err(|e: String| invalid(k, e))?,
            "split.train_years" => cfg.split.train_years = as_years(k, v)?,
            "split.test_years" => cfg.split.test_years = as_years(k, v)?,
            "split.discard_years" => cfg.split.discard_years = as_years(k, v)?,
            "models.kinds" => {
                let mut kinds = Vec::new();
                for item in as_array(k, v)? {
                    let kind: ModelKind = as_str(k, item)?.parse().map_err(|e: String| invalid(k, e))?;
                    if !kinds.contains(&kind) {
                        kinds.push(kind);
                    }
                }
                if kinds.is_empty() {
                    return Err(invalid(k, "at least one model kind is required"));
                }
                cfg.kinds = kinds;
            }
            "forest.n_trees" => hp.forest.n_trees = as_count(k, v, 1)?,
            "forest.max_depth" => hp.forest.max_depth = as_count(k, v, 0)?,
            "forest.min_leaf" => hp.forest.min_leaf = as_count(k, v, 1)?,
            "forest.features_per_split" => hp.forest.features_per_split = Some(as_count(k, v, 1)?),
            "forest.bootstrap" => {
                hp.forest.bootstrap = v.as_bool().ok_or_else(|| invalid(k, format!("expected a boolean, got {v}")))?
            }
            "tree.max_depth" => hp.tree.max_depth = as_count(k, v, 0)?,
            "tree.min_leaf" => hp.tree.min_leaf = as_count(k, v, 1)?,
            "gaussian_nb.var_floor" => hp.gaussian_nb.var_floor = as_positive(k, v)?,
            "linear_svm.lambda" => hp.linear_svm.lambda = as_positive(k, v)?,
            "linear_svm.epochs" => hp.linear_svm.epochs = as_count(k, v, 1)?,
            "knn.k" => hp.knn.k = as_count(k, v, 1)?,
            "mlp.hidden" => hp.mlp.hidden = as_count(k, v, 1)?,
            "mlp.learning_rate" => hp.mlp.learning_rate = as_positive(k, v)?,
            "mlp.epochs" => hp.mlp.epochs = as_count(k, v, 0)?,
            "mlp.init_scale" => hp.mlp.init_scale = as_positive(k, v)?,
            "import.verify_checksums" => {
                cfg.verify_checksums = v.as_bool().ok_or_else(|| invalid(k, format!("expected a boolean, got {v}")))?
            }
            "synth.start" => cfg.synth.start = as_str(k, v)?.to_string(),
            "synth.end" => cfg.synth.end = as_str(k, v)?.to_string(),
            "synth.spike_spacing" => cfg.synth.spike_spacing = as_count(k, v, 2)?,
            _ => return Err(ConfigError::UnknownKey(key.clone())),
        }
    }
    cfg.features.validate().map_err(|e| {
        let key = if e.to_string().contains("interval") { "interval" } else { "features" };
        invalid(key, e.to_string())
    })?;
    cfg.split.validate().map_err(|e| invalid("split", e))?;
    for (key, date) in [("synth.start", &cfg.synth.start), ("synth.end", &cfg.synth.end)] {
        chrono::NaiveDate::parse_from_str(date, "%Y-%m-%d").map_err(|e| invalid(key, e.to_string()))?;
    }
    Ok(cfg)
}
