mod config;
mod manifest;
mod stages;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use log::{error, info};
use unrest::CountryCode;

use crate::config::{load_config, SourceSpec};
use crate::stages::{Layout, Stage, StageContext};

/// Civil-unrest forecasting pipeline over GDELT protest events.
#[derive(Debug, Parser)]
#[command(name = "unrest", version)]
struct Cli {
    /// Stage to run; `all` runs import through report.
    #[arg(value_enum)]
    stage: Stage,
    /// Configuration file (flat dotted TOML keys).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Country to process (FIPS code); repeat for several. Overrides `countries`.
    #[arg(long = "country")]
    countries: Vec<CountryCode>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; outputs do not depend on it.
    #[arg(long)]
    jobs: Option<usize>,
    /// Evaluate on features as known this many days before each interval ends.
    #[arg(long)]
    horizon: Option<usize>,
    /// Payload mirror directory or base URL.
    #[arg(long)]
    source: Option<String>,
}

fn init_logging() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format(|buf, record| writeln!(buf, "level={} {}", record.level().as_str().to_ascii_lowercase(), record.args()))
        .target(env_logger::Target::Stderr)
        .init();
}

fn run(cli: Cli) -> Result<(), String> {
    let mut cfg = load_config(cli.config.as_deref(), std::env::vars()).map_err(|e| e.to_string())?;
    if !cli.countries.is_empty() {
        cfg.countries = cli.countries;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(source) = &cli.source {
        cfg.source = SourceSpec::parse(source);
    }
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .map_err(|e| format!("configuring {jobs} workers: {e}"))?;
    }
    if let Some(h) = cli.horizon {
        if h > cfg.features.max_lag {
            return Err(format!("horizon {h} exceeds the maximum lag of {} days", cfg.features.max_lag));
        }
    }

    let layout = Layout { root: cfg.store_root.clone() };
    let ctx = StageContext { cfg: &cfg, layout: layout.clone(), horizon: cli.horizon };
    let stages: Vec<Stage> = if cli.stage == Stage::All { Stage::PIPELINE.to_vec() } else { vec![cli.stage] };
    for stage in stages {
        info!("stage={} status=start", stage.name());
        let outcome = stages::run(stage, &ctx).map_err(|e| format!("stage {} failed: {e}", stage.name()))?;
        manifest::append(&layout.manifest(), &layout.root, stage.name(), &cfg, cli.horizon, &outcome)
            .map_err(|e| format!("writing manifest: {e}"))?;
        info!("stage={} status=done outputs={}", stage.name(), outcome.outputs.len());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            error!("{message}");
            ExitCode::FAILURE
        }
    }
}
