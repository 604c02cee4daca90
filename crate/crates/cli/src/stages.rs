use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use log::{info, warn};
use rayon::prelude::*;
use unrest::evaluation::{
    accuracy_svg, build_lookahead_features, compare_classifiers, parse_report_csv, report_csv, score_model, EvalError,
    EvalMode, EvalReport,
};
use unrest::features::{build_features, daily_counts, parse_feature_csv, write_feature_csv, CsvError, FeatureError};
use unrest::fsutil::write_atomic;
use unrest::ingest::{
    read_country, run_import, ImportError, ImportOptions, ImportState, LocalDirSource, PartitionStore, PayloadSource,
    StateError, StoreError,
};
use unrest::labeling::{assemble_dataset, split_by_year, LabeledDataset, SplitWarning};
use unrest::models::{fit, FeatureMatrix, ModelError, ModelKind, TrainedModel};
use unrest::synthdata::{generate, PayloadSet, SuiteConfig, SynthError, DEFAULT_FIRST_EVENT_ID};
use unrest::CountryCode;

use crate::config::{PipelineConfig, SourceSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Stage {
    Import,
    Features,
    Label,
    Train,
    Evaluate,
    Compare,
    Synth,
    Report,
    All,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Import => "import",
            Stage::Features => "features",
            Stage::Label => "label",
            Stage::Train => "train",
            Stage::Evaluate => "evaluate",
            Stage::Compare => "compare",
            Stage::Synth => "synth",
            Stage::Report => "report",
            Stage::All => "all",
        }
    }

    /// The stages `all` runs, in dependency order.
    pub const PIPELINE: [Stage; 7] =
        [Stage::Import, Stage::Features, Stage::Label, Stage::Train, Stage::Evaluate, Stage::Compare, Stage::Report];
}

#[derive(Debug, thiserror::Error)]
pub enum StageError {
    #[error("missing {artifact} (produced by `{produced_by}`)")]
    MissingPrerequisite { artifact: String, produced_by: &'static str },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Import(#[from] ImportError),
    #[error("import state: {0}")]
    State(#[from] StateError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("{country}: {source}")]
    Feature { country: CountryCode, source: FeatureError },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: CsvError },
    #[error("{path}: {source}")]
    Model { path: PathBuf, source: ModelError },
    #[error("{country}: {source}")]
    Eval { country: CountryCode, source: EvalError },
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("{0}")]
    Invalid(String),
}

/// File layout under the store root.
#[derive(Debug, Clone)]
pub struct Layout {
    pub root: PathBuf,
}

impl Layout {
    pub fn raw(&self) -> PathBuf {
        self.root.join("raw")
    }
    pub fn features(&self, cc: CountryCode) -> PathBuf {
        self.root.join("features").join(format!("{cc}.csv"))
    }
    pub fn labeled(&self, cc: CountryCode) -> PathBuf {
        self.root.join("labeled").join(format!("{cc}.csv"))
    }
    pub fn model(&self, cc: CountryCode, kind: ModelKind) -> PathBuf {
        self.root.join("models").join(cc.as_str()).join(format!("{kind}.model"))
    }
    pub fn report(&self, cc: CountryCode) -> PathBuf {
        self.root.join("reports").join(format!("{cc}.csv"))
    }
    pub fn figure(&self, cc: CountryCode) -> PathBuf {
        self.root.join("reports").join(format!("accuracy_{cc}.svg"))
    }
    pub fn evaluation(&self, cc: CountryCode, mode: EvalMode) -> PathBuf {
        let name = match mode {
            EvalMode::Standard => format!("{cc}.eval.json"),
            EvalMode::Lookahead { horizon } => format!("{cc}.lookahead_{horizon}.eval.json"),
        };
        self.root.join("reports").join(name)
    }
    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest.json-lines")
    }
}

/// Files a stage read and wrote, for the manifest.
#[derive(Debug, Default)]
pub struct StageOutcome {
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
}

pub struct StageContext<'a> {
    pub cfg: &'a PipelineConfig,
    pub layout: Layout,
    pub horizon: Option<usize>,
}

fn read_input(path: &Path, artifact: &str, produced_by: &'static str) -> Result<String, StageError> {
    match fs::read_to_string(path) {
        Ok(text) => Ok(text),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            Err(StageError::MissingPrerequisite { artifact: format!("{artifact} {}", path.display()), produced_by })
        }
        Err(source) => Err(StageError::Io { path: path.into(), source }),
    }
}

fn write_output(path: &Path, contents: &[u8], outcome: &mut StageOutcome) -> Result<(), StageError> {
    write_atomic(path, contents).map_err(|source| StageError::Io { path: path.into(), source })?;
    outcome.outputs.push(path.into());
    Ok(())
}

/// Runs `f` for every country in parallel and returns results in config order.
fn per_country<T: Send>(
    countries: &[CountryCode],
    f: impl Fn(CountryCode) -> Result<T, StageError> + Sync,
) -> Result<Vec<T>, StageError> {
    countries.par_iter().map(|&cc| f(cc)).collect::<Vec<_>>().into_iter().collect()
}

fn load_events(ctx: &StageContext, cc: CountryCode) -> Result<Vec<unrest::ingest::EventRecord>, StageError> {
    read_country(&ctx.layout.raw(), cc)?.ok_or_else(|| StageError::MissingPrerequisite {
        artifact: format!("partition store for {cc}"),
        produced_by: "import",
    })
}

fn load_labeled(ctx: &StageContext, cc: CountryCode) -> Result<(LabeledDataset, PathBuf), StageError> {
    let path = ctx.layout.labeled(cc);
    let text = read_input(&path, "labeled dataset", "label")?;
    let ds = LabeledDataset::from_csv(cc, &text).map_err(|source| StageError::Csv { path: path.clone(), source })?;
    Ok((ds, path))
}

pub fn run(stage: Stage, ctx: &StageContext) -> Result<StageOutcome, StageError> {
    match stage {
        Stage::Import => import(ctx),
        Stage::Features => features(ctx),
        Stage::Label => label(ctx),
        Stage::Train => train(ctx),
        Stage::Evaluate => evaluate(ctx),
        Stage::Compare => compare(ctx),
        Stage::Synth => synth(ctx),
        Stage::Report => report(ctx),
        Stage::All => unreachable!("`all` is expanded by the caller"),
    }
}

fn import(ctx: &StageContext) -> Result<StageOutcome, StageError> {
    let source: Box<dyn PayloadSource> = match &ctx.cfg.source {
        SourceSpec::Local(dir) => Box::new(LocalDirSource::new(dir)),
        SourceSpec::Http(url) => Box::new(unrest::ingest::HttpSource::new(url.clone())),
    };
    let mut state = ImportState::load(&ctx.layout.root)?;
    let mut store = PartitionStore::open(ctx.layout.raw());
    let countries: BTreeSet<CountryCode> = ctx.cfg.countries.iter().copied().collect();
    let opts = ImportOptions { verify_checksums: ctx.cfg.verify_checksums };
    let result = run_import(source.as_ref(), &mut state, &mut store, &countries, opts, true);
    // Progress up to a failure is kept so the next run resumes after it.
    state.save(&ctx.layout.root)?;
    let report = result?;
    info!(
        "stage=import source={} planned={} imported={} failed={} lines={} malformed={} appended={} duplicates={} out_of_scope={}",
        source.describe(),
        report.planned,
        report.imported,
        report.failed,
        report.lines,
        report.malformed,
        report.partition.total_appended(),
        report.partition.duplicates,
        report.partition.dropped,
    );
    if report.failed > 0 {
        warn!("stage=import corrupt_payloads={}", report.failed);
    }
    let mut outcome = StageOutcome::default();
    for key in store.shard_keys() {
        outcome.outputs.push(unrest::ingest::shard_path(&ctx.layout.raw(), key));
    }
    outcome.outputs.push(ctx.layout.root.join(unrest::ingest::STATE_FILE));
    Ok(outcome)
}

fn features(ctx: &StageContext) -> Result<StageOutcome, StageError> {
    let cfg = &ctx.cfg.features;
    let built = per_country(&ctx.cfg.countries, |cc| {
        let events = load_events(ctx, cc)?;
        let series = daily_counts(cc, &events, cfg);
        let rows = build_features(&series, cfg).map_err(|source| StageError::Feature { country: cc, source })?;
        info!("stage=features country={cc} days={} intervals={}", series.len(), rows.len());
        Ok((cc, write_feature_csv(&rows, cfg.max_lag)))
    })?;
    let mut outcome = StageOutcome::default();
    for (cc, csv) in built {
        outcome.inputs.extend(raw_files(&ctx.layout.raw().join(cc.as_str())));
        write_output(&ctx.layout.features(cc), csv.as_bytes(), &mut outcome)?;
    }
    Ok(outcome)
}

fn raw_files(dir: &Path) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .into_iter()
        .flatten()
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "tsv"))
        .collect();
    files.sort();
    files
}

fn label(ctx: &StageContext) -> Result<StageOutcome, StageError> {
    let cfg = &ctx.cfg.features;
    let mut outcome = StageOutcome::default();
    for &cc in &ctx.cfg.countries {
        let path = ctx.layout.features(cc);
        let text = read_input(&path, "feature table", "features")?;
        let (rows, max_lag) = parse_feature_csv(&text).map_err(|source| StageError::Csv { path: path.clone(), source })?;
        let ds = assemble_dataset(cc, rows, max_lag, cfg.delta, ctx.cfg.label_stat);
        info!("stage=label country={cc} rows={} positives={} stat={}", ds.len(), ds.positives(), ctx.cfg.label_stat);
        outcome.inputs.push(path);
        write_output(&ctx.layout.labeled(cc), ds.to_csv().as_bytes(), &mut outcome)?;
    }
    Ok(outcome)
}

fn log_split(cc: CountryCode, split: &unrest::labeling::Split) {
    info!(
        "country={cc} train={} test={} discarded={} out_of_range={}",
        split.train.len(),
        split.test.len(),
        split.discarded,
        split.out_of_range
    );
    for w in &split.warnings {
        match w {
            SplitWarning::EmptyTrain => warn!("country={cc} warning=empty_train_split"),
            SplitWarning::EmptyTest => warn!("country={cc} warning=empty_test_split"),
        }
    }
}

fn train(ctx: &StageContext) -> Result<StageOutcome, StageError> {
    let mut outcome = StageOutcome::default();
    for &cc in &ctx.cfg.countries {
        let (ds, path) = load_labeled(ctx, cc)?;
        outcome.inputs.push(path);
        let split = split_by_year(&ds, &ctx.cfg.split);
        log_split(cc, &split);
        if split.train.is_empty() {
            return Err(StageError::Eval { country: cc, source: EvalError::EmptyTrain });
        }
        let data = FeatureMatrix::from_dataset(&split.train);
        for &kind in &ctx.cfg.kinds {
            let model_path = ctx.layout.model(cc, kind);
            let fitted = fit(kind, &data, &ctx.cfg.hyperparams, ctx.cfg.seed)
                .map_err(|source| StageError::Model { path: model_path.clone(), source })?;
            for w in &fitted.warnings {
                warn!("stage=train country={cc} kind={kind} warning={w:?}");
            }
            info!("stage=train country={cc} kind={kind} rows={}", data.len());
            write_output(&model_path, fitted.model.to_json().as_bytes(), &mut outcome)?;
        }
    }
    Ok(outcome)
}

fn evaluate(ctx: &StageContext) -> Result<StageOutcome, StageError> {
    let mode = match ctx.horizon {
        None | Some(0) => EvalMode::Standard,
        Some(horizon) => EvalMode::Lookahead { horizon },
    };
    let mut outcome = StageOutcome::default();
    for &cc in &ctx.cfg.countries {
        let (ds, path) = load_labeled(ctx, cc)?;
        outcome.inputs.push(path);
        let split = split_by_year(&ds, &ctx.cfg.split);
        log_split(cc, &split);
        if split.test.is_empty() {
            return Err(StageError::Eval { country: cc, source: EvalError::EmptyTest });
        }
        let test = match mode {
            EvalMode::Standard => split.test.clone(),
            EvalMode::Lookahead { horizon } => {
                let series = daily_counts(cc, &load_events(ctx, cc)?, &ctx.cfg.features);
                build_lookahead_features(&series, &ctx.cfg.features, &split.test, horizon)
                    .map_err(|source| StageError::Eval { country: cc, source })?
            }
        };
        let mut scores = Vec::new();
        for &kind in &ctx.cfg.kinds {
            let model_path = ctx.layout.model(cc, kind);
            let text = read_input(&model_path, "trained model", "train")?;
            let model = TrainedModel::from_json(&text)
                .map_err(|source| StageError::Model { path: model_path.clone(), source })?;
            let score = score_model(&model, &test).map_err(|source| StageError::Eval { country: cc, source })?;
            info!(
                "stage=evaluate country={cc} kind={kind} mode={mode:?} accuracy={:.4} mae={:.4}",
                score.accuracy, score.mae
            );
            scores.push(score);
            outcome.inputs.push(model_path);
        }
        let report = EvalReport {
            country: cc.to_string(),
            scores,
            n_train: split.train.len(),
            n_test: test.len(),
            split: ctx.cfg.split.clone(),
            seed: ctx.cfg.seed,
            mode,
        };
        let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
        write_output(&ctx.layout.evaluation(cc, mode), json.as_bytes(), &mut outcome)?;
    }
    Ok(outcome)
}

fn compare(ctx: &StageContext) -> Result<StageOutcome, StageError> {
    let mut outcome = StageOutcome::default();
    for &cc in &ctx.cfg.countries {
        let (ds, path) = load_labeled(ctx, cc)?;
        outcome.inputs.push(path);
        let split = split_by_year(&ds, &ctx.cfg.split);
        log_split(cc, &split);
        let comparison =
            compare_classifiers(&split.train, &split.test, &ctx.cfg.kinds, &ctx.cfg.hyperparams, ctx.cfg.seed)
                .map_err(|source| StageError::Eval { country: cc, source })?;
        for (kind, w) in &comparison.warnings {
            warn!("stage=compare country={cc} kind={kind} warning={w:?}");
        }
        for row in &comparison.table.rows {
            info!("stage=compare country={cc} kind={} accuracy={:.4} mae={:.4}", row.kind, row.accuracy, row.mae);
        }
        write_output(&ctx.layout.report(cc), report_csv(&comparison.table).as_bytes(), &mut outcome)?;
    }
    Ok(outcome)
}

fn report(ctx: &StageContext) -> Result<StageOutcome, StageError> {
    let mut outcome = StageOutcome::default();
    for &cc in &ctx.cfg.countries {
        let path = ctx.layout.report(cc);
        let text = read_input(&path, "comparison table", "compare")?;
        let table = parse_report_csv(&text).map_err(|e| StageError::Invalid(format!("{}: {e}", path.display())))?;
        if table.rows.is_empty() {
            return Err(StageError::Invalid(format!("{}: comparison table is empty", path.display())));
        }
        outcome.inputs.push(path);
        write_output(&ctx.layout.figure(cc), accuracy_svg(&table, cc.as_str()).as_bytes(), &mut outcome)?;
        info!("stage=report country={cc} bars={}", table.rows.len());
    }
    Ok(outcome)
}

fn synth(ctx: &StageContext) -> Result<StageOutcome, StageError> {
    let SourceSpec::Local(dir) = &ctx.cfg.source else {
        return Err(StageError::Invalid("`synth` writes to a local source directory, not a URL".into()));
    };
    let date = |s: &str| NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|e| StageError::Invalid(e.to_string()));
    let suite = SuiteConfig {
        start: date(&ctx.cfg.synth.start)?,
        end: date(&ctx.cfg.synth.end)?,
        spike_spacing: ctx.cfg.synth.spike_spacing,
        ..SuiteConfig::default()
    };
    if suite.end < suite.start {
        return Err(StageError::Invalid("synth.end is before synth.start".into()));
    }
    let corpora = ctx
        .cfg
        .countries
        .par_iter()
        .enumerate()
        .map(|(i, &cc)| {
            let mut spec = suite.spec(cc, ctx.cfg.seed.wrapping_add(i as u64), &ctx.cfg.features);
            spec.first_event_id = DEFAULT_FIRST_EVENT_ID + i as u64 * 100_000_000;
            generate(&spec, &ctx.cfg.features)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let set = PayloadSet::merge(&corpora)?;
    set.write_to_dir(dir)?;
    let mut outcome = StageOutcome::default();
    for corpus in &corpora {
        let cc = corpus.spec.country;
        let path = dir.join(format!("ground_truth_{cc}.csv"));
        write_output(&path, corpus.truth.to_csv().as_bytes(), &mut outcome)?;
        info!(
            "stage=synth country={cc} days={} events={} spikes={} positives={}",
            corpus.counts.len(),
            corpus.total_events(),
            corpus.spec.spikes.len(),
            corpus.truth.labels().iter().filter(|&&l| l == 1).count()
        );
    }
    outcome.outputs.push(dir.join(unrest::ingest::MASTER_INDEX_FILE));
    info!("stage=synth dir={} payloads={}", dir.display(), set.payloads.len());
    Ok(outcome)
}
