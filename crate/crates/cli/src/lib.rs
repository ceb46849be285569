//! Experiment runner behind the `seqtune` binary: JSON configs in, CSV and
//! JSON artifacts out.

mod config;

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{Context, Result};
use serde::Serialize;

use seqtune_core::dist_fit::dist_study;
use seqtune_core::rng::{derive_seed, stream};
use seqtune_core::tuner::{
    aggregate, default_shift, paired_compare, random_search, sqrs, write_aggregate_csv,
    write_decision_log_csv, write_duels_csv, write_reports_csv, PairedSpec, SettingAggregate,
    SqrsOptions, Termination,
};
use seqtune_core::{Config, EvalCache, ResamplingInstance, TaskKind};

pub use config::{DistStudyConfig, ExperimentConfig, TaskSpec, TunerConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Rs,
    Sqrs,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Rs => "rs",
            Algorithm::Sqrs => "sqrs",
        }
    }
}

/// Run-time options shared by every command.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides the config's `output_dir`.
    pub out: Option<PathBuf>,
    /// Worker threads; `0` means all cores.
    pub jobs: usize,
}

fn output_dir(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<PathBuf> {
    let dir = opts
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("seqtune-out"));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn shift(cfg: &ExperimentConfig, task: TaskKind) -> f64 {
    cfg.tuner.shift.unwrap_or_else(|| default_shift(task))
}

/// Summary of a `diststudy` run.
#[derive(Debug, Clone)]
pub struct DistStudySummary {
    pub out_dir: PathBuf,
    /// `(family, median CvM, fits)`, best first.
    pub ranking: Vec<(String, f64, usize)>,
    pub failures: usize,
}

/// Writes `dist_fits.csv`, `dist_summary.csv` and `dist_failures.csv`.
pub fn cmd_diststudy(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<DistStudySummary> {
    let data = cfg.load_dataset()?;
    let out_dir = output_dir(cfg, opts)?;
    let study = dist_study(
        &data,
        cfg.learner,
        &cfg.space(),
        cfg.dist_study.n_configs,
        cfg.dist_study.n_boot,
        cfg.seed,
    )?;
    study.write_csv(create(&out_dir, "dist_fits.csv")?)?;
    study.write_summary_csv(create(&out_dir, "dist_summary.csv")?)?;
    study.write_failures_csv(create(&out_dir, "dist_failures.csv")?)?;
    Ok(DistStudySummary {
        out_dir,
        ranking: study
            .summary()
            .into_iter()
            .map(|s| (s.family.to_string(), s.median_cvm, s.fits))
            .collect(),
        failures: study.failures.len(),
    })
}

/// Contents of `tune_<algorithm>.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuneSummary {
    pub algorithm: &'static str,
    pub learner: &'static str,
    pub task_kind: &'static str,
    pub seed: u64,
    pub k: usize,
    pub n_configs: usize,
    pub best: Config,
    /// Mean loss of `best` over the partitions it was evaluated on.
    pub mean_loss: f64,
    pub partitions_evaluated: usize,
    /// Learner trainings performed.
    pub fits: usize,
    /// Distinct `(config, partition)` losses used.
    pub evaluations: usize,
    pub candidates_seen: usize,
    pub eval_ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub setting: Option<String>,
    /// Loss shift and log mode the duels ran on (SQRS only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_transform: Option<bool>,
}

/// Runs one tuner on the config's task. Writes `tune_<algorithm>.json`,
/// `cache_<algorithm>.csv` and, for SQRS, `duels_sqrs.csv`.
pub fn cmd_tune(
    cfg: &ExperimentConfig,
    algorithm: Algorithm,
    opts: &RunOptions,
) -> Result<TuneSummary> {
    let data = cfg.load_dataset()?;
    let out_dir = output_dir(cfg, opts)?;
    let t = &cfg.tuner;
    let space = cfg.space();
    let instance =
        ResamplingInstance::fixed(data.n_rows(), t.k, derive_seed(cfg.seed, "instance", 0))?
            .for_dataset(&data)?;
    let mut configs_rng = stream(cfg.seed, "configs", 0);
    let mut cache = EvalCache::new();
    let budget = t.n_configs * t.k;

    let summary = match algorithm {
        Algorithm::Rs => {
            let rs = random_search(
                &space,
                cfg.learner,
                &data,
                &instance,
                t.n_configs,
                &mut configs_rng,
                &mut cache,
            )?;
            TuneSummary {
                algorithm: algorithm.as_str(),
                learner: cfg.learner.as_str(),
                task_kind: data.task().as_str(),
                seed: cfg.seed,
                k: t.k,
                n_configs: t.n_configs,
                best: rs.best.clone(),
                mean_loss: rs.best_mean,
                partitions_evaluated: t.k,
                fits: rs.fits,
                evaluations: cache.len(),
                candidates_seen: rs.configs.len(),
                eval_ratio: cache.len() as f64 / budget as f64,
                setting: None,
                shift: None,
                log_transform: None,
            }
        }
        Algorithm::Sqrs => {
            let candidates = space.sample_configs(&mut configs_rng, t.n_configs, 0);
            let options = SqrsOptions {
                slrt: t.sqrs_setting.config(t.k)?,
                shift: shift(cfg, data.task()),
                log_transform: t.log_transform,
                termination: Termination {
                    max_candidates: t.max_candidates,
                    time_budget: t.time_budget_secs.map(Duration::from_secs_f64),
                },
            };
            let res = sqrs(
                &candidates,
                cfg.learner,
                &data,
                &instance,
                &options,
                &mut cache,
            )?;
            write_duels_csv(&res.duels, create(&out_dir, "duels_sqrs.csv")?)?;
            let own: Vec<f64> = cache
                .iter()
                .filter(|(id, _, _)| *id == res.incumbent.id)
                .map(|(_, _, loss)| loss)
                .collect();
            TuneSummary {
                algorithm: algorithm.as_str(),
                learner: cfg.learner.as_str(),
                task_kind: data.task().as_str(),
                seed: cfg.seed,
                k: t.k,
                n_configs: t.n_configs,
                best: res.incumbent.clone(),
                mean_loss: own.iter().sum::<f64>() / own.len() as f64,
                partitions_evaluated: own.len(),
                fits: res.fits,
                evaluations: res.evaluations,
                candidates_seen: res.candidates_seen,
                eval_ratio: res.eval_ratio(budget),
                setting: Some(t.sqrs_setting.label().to_string()),
                shift: Some(options.shift),
                log_transform: Some(options.log_transform),
            }
        }
    };
    cache.export_csv(create(
        &out_dir,
        &format!("cache_{}.csv", algorithm.as_str()),
    )?)?;
    let mut json = serde_json::to_string_pretty(&summary)?;
    json.push('\n');
    fs::write(
        out_dir.join(format!("tune_{}.json", algorithm.as_str())),
        json,
    )?;
    Ok(summary)
}

/// Effective settings of a `compare` run, written to `compare_run.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
struct CompareRun<'a> {
    learner: &'static str,
    task_kind: &'static str,
    seed: u64,
    k: usize,
    n_configs: usize,
    replications: usize,
    shift: f64,
    log_transform: bool,
    settings: Vec<(&'a str, seqtune_core::SlrtConfig)>,
}

/// Writes `compare_reports.csv`, `compare_aggregate.csv`,
/// `compare_decisions.csv` and `compare_run.json`.
pub fn cmd_compare(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<SettingAggregate>> {
    let data = cfg.load_dataset()?;
    let out_dir = output_dir(cfg, opts)?;
    let t = &cfg.tuner;
    let spec = PairedSpec {
        kind: cfg.learner,
        k: t.k,
        n_configs: t.n_configs,
        settings: t.settings.clone(),
        shift: shift(cfg, data.task()),
        log_transform: t.log_transform,
        replications: t.replications,
        seed: cfg.seed,
        jobs: opts.jobs,
    };
    let run = CompareRun {
        learner: cfg.learner.as_str(),
        task_kind: data.task().as_str(),
        seed: cfg.seed,
        k: spec.k,
        n_configs: spec.n_configs,
        replications: spec.replications,
        shift: spec.shift,
        log_transform: spec.log_transform,
        settings: t
            .settings
            .iter()
            .map(|s| Ok((s.label(), s.config(t.k)?)))
            .collect::<Result<_>>()?,
    };
    let outcome = paired_compare(&cfg.space(), &data, &spec)?;
    let aggs = aggregate(&outcome.reports);
    write_reports_csv(&outcome.reports, create(&out_dir, "compare_reports.csv")?)?;
    write_aggregate_csv(&aggs, create(&out_dir, "compare_aggregate.csv")?)?;
    write_decision_log_csv(&outcome, create(&out_dir, "compare_decisions.csv")?)?;
    let mut json = serde_json::to_string_pretty(&run)?;
    json.push('\n');
    fs::write(out_dir.join("compare_run.json"), json)?;
    Ok(aggs)
}
