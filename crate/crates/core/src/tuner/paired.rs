use std::io::Write;

use rayon::prelude::*;

use super::{duel_record, random_search_over, sqrs, Duel, SqrsOptions, Termination, DUEL_HEADER};
use crate::data::{Dataset, TaskKind};
use crate::error::{Error, Result};
use crate::learners::LearnerKind;
use crate::param_space::ParamSpace;
use crate::resampling::{EvalCache, ResamplingInstance};
use crate::rng::{derive_seed, stream};
use crate::seqtest::{Setting, SettingSpec};

use rand::seq::SliceRandom;

#[derive(Debug, Clone, PartialEq)]
pub struct PairedSpec {
    pub kind: LearnerKind,
    /// Partitions per instance; also the duel horizon `n_max`.
    pub k: usize,
    pub n_configs: usize,
    pub settings: Vec<SettingSpec>,
    pub shift: f64,
    pub log_transform: bool,
    pub replications: usize,
    pub seed: u64,
    /// Worker threads; `0` uses rayon's default.
    pub jobs: usize,
}

impl PairedSpec {
    pub fn new(kind: LearnerKind, task: TaskKind, replications: usize, seed: u64) -> Self {
        Self {
            kind,
            k: 10,
            n_configs: 50,
            settings: Setting::ALL.into_iter().map(SettingSpec::from).collect(),
            shift: super::default_shift(task),
            log_transform: true,
            replications,
            seed,
            jobs: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairedReport {
    pub setting: String,
    pub task: TaskKind,
    pub replication: usize,
    pub identical: bool,
    /// SQRS winner's mean over all partitions divided by the random-search best.
    pub perf_ratio: f64,
    /// Distinct evaluations SQRS needed divided by `n_configs · K`.
    pub eval_ratio: f64,
    pub rs_best_id: u64,
    pub sqrs_best_id: u64,
    pub rs_fits: usize,
    pub sqrs_evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct PairedOutcome {
    pub reports: Vec<PairedReport>,
    /// `(setting, replication, duels)` in report order.
    pub duel_logs: Vec<(String, usize, Vec<Duel>)>,
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == den {
        1.0
    } else {
        num / den
    }
}

fn replicate(
    space: &ParamSpace,
    data: &Dataset,
    spec: &PairedSpec,
    r: usize,
) -> Result<Vec<(PairedReport, Vec<Duel>)>> {
    let rep_seed = derive_seed(spec.seed, "replication", r as u64);
    let instance =
        ResamplingInstance::fixed(data.n_rows(), spec.k, derive_seed(rep_seed, "instance", 0))?
            .for_dataset(data)?;
    let configs = space.sample_configs(&mut stream(rep_seed, "configs", 0), spec.n_configs, 0);
    let mut cache = EvalCache::new();
    let rs = random_search_over(configs.clone(), spec.kind, data, &instance, &mut cache)?;
    let mut order = configs;
    order.shuffle(&mut stream(rep_seed, "shuffle", 0));
    let budget = spec.n_configs * spec.k;

    spec.settings
        .iter()
        .map(|setting| {
            let options = SqrsOptions {
                slrt: setting.config(spec.k)?,
                shift: spec.shift,
                log_transform: spec.log_transform,
                termination: Termination::default(),
            };
            let res = sqrs(&order, spec.kind, data, &instance, &options, &mut cache)?;
            let sqrs_mean = rs
                .mean_loss(res.incumbent.id)
                .expect("winner is one of the configs");
            let report = PairedReport {
                setting: setting.label().to_string(),
                task: data.task(),
                replication: r,
                identical: res.incumbent.id == rs.best.id,
                perf_ratio: ratio(sqrs_mean, rs.best_mean),
                eval_ratio: res.eval_ratio(budget),
                rs_best_id: rs.best.id,
                sqrs_best_id: res.incumbent.id,
                rs_fits: rs.fits,
                sqrs_evaluations: res.evaluations,
            };
            Ok((report, res.duels))
        })
        .collect()
}

/// Runs `replications` paired random-search / SQRS comparisons. Each
/// replication draws its own instance, configurations and candidate order
/// from the root seed, so results do not depend on `jobs`.
pub fn paired_compare(
    space: &ParamSpace,
    data: &Dataset,
    spec: &PairedSpec,
) -> Result<PairedOutcome> {
    if spec.n_configs < 2 || spec.replications == 0 || spec.settings.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "need n_configs >= 2, replications >= 1 and a setting (got {}, {}, {})",
            spec.n_configs,
            spec.replications,
            spec.settings.len()
        )));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let per_rep: Vec<Vec<(PairedReport, Vec<Duel>)>> = pool.install(|| {
        (0..spec.replications)
            .into_par_iter()
            .map(|r| replicate(space, data, spec, r))
            .collect::<Result<_>>()
    })?;
    let mut out = PairedOutcome {
        reports: Vec::new(),
        duel_logs: Vec::new(),
    };
    for (report, duels) in per_rep.into_iter().flatten() {
        out.duel_logs
            .push((report.setting.clone(), report.replication, duels));
        out.reports.push(report);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SettingAggregate {
    pub setting: String,
    pub task: TaskKind,
    pub replications: usize,
    pub identical_proportion: f64,
    pub median_eval_ratio: f64,
    /// Performance ratios different from 1.
    pub perf_ratios_not_one: Vec<f64>,
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Per-setting summary in order of first appearance.
pub fn aggregate(reports: &[PairedReport]) -> Vec<SettingAggregate> {
    let mut keys: Vec<(&str, TaskKind)> = Vec::new();
    for r in reports {
        if !keys.contains(&(r.setting.as_str(), r.task)) {
            keys.push((r.setting.as_str(), r.task));
        }
    }
    keys.into_iter()
        .map(|(setting, task)| {
            let rows: Vec<&PairedReport> = reports
                .iter()
                .filter(|r| r.setting == setting && r.task == task)
                .collect();
            let n = rows.len();
            SettingAggregate {
                setting: setting.to_string(),
                task,
                replications: n,
                identical_proportion: rows.iter().filter(|r| r.identical).count() as f64 / n as f64,
                median_eval_ratio: median(rows.iter().map(|r| r.eval_ratio).collect()),
                perf_ratios_not_one: rows
                    .iter()
                    .map(|r| r.perf_ratio)
                    .filter(|&p| p != 1.0)
                    .collect(),
            }
        })
        .collect()
}

/// `setting,task_kind,replication,identical,perf_ratio,eval_ratio`
pub fn write_reports_csv<W: Write>(reports: &[PairedReport], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "setting",
        "task_kind",
        "replication",
        "identical",
        "perf_ratio",
        "eval_ratio",
    ])?;
    for r in reports {
        w.write_record([
            r.setting.clone(),
            r.task.as_str().to_string(),
            r.replication.to_string(),
            r.identical.to_string(),
            r.perf_ratio.to_string(),
            r.eval_ratio.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `setting,task_kind,replications,identical_proportion,median_eval_ratio,n_perf_ratio_not_1,median_perf_ratio_not_1`
pub fn write_aggregate_csv<W: Write>(aggs: &[SettingAggregate], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "setting",
        "task_kind",
        "replications",
        "identical_proportion",
        "median_eval_ratio",
        "n_perf_ratio_not_1",
        "median_perf_ratio_not_1",
    ])?;
    for a in aggs {
        w.write_record([
            a.setting.clone(),
            a.task.as_str().to_string(),
            a.replications.to_string(),
            a.identical_proportion.to_string(),
            a.median_eval_ratio.to_string(),
            a.perf_ratios_not_one.len().to_string(),
            median(a.perf_ratios_not_one.clone()).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Duel logs of every run, prefixed with `setting,replication`.
pub fn write_decision_log_csv<W: Write>(outcome: &PairedOutcome, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let header: Vec<&str> = ["setting", "replication"]
        .into_iter()
        .chain(DUEL_HEADER)
        .collect();
    w.write_record(&header)?;
    for (setting, r, duels) in &outcome.duel_logs {
        for (i, d) in duels.iter().enumerate() {
            let fields: Vec<String> = [setting.clone(), r.to_string()]
                .into_iter()
                .chain(duel_record(i, d))
                .collect();
            w.write_record(&fields)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{make_synthetic, SyntheticKind};

    fn small_spec(jobs: usize) -> PairedSpec {
        PairedSpec {
            n_configs: 12,
            jobs,
            ..PairedSpec::new(LearnerKind::CartTree, TaskKind::Classification, 4, 9)
        }
    }

    #[test]
    fn structural_invariants_hold() {
        let ds = make_synthetic(SyntheticKind::TwoGaussiansClassification, 120, 3, 1.5, 1).unwrap();
        let space = LearnerKind::CartTree.default_space();
        let out = paired_compare(&space, &ds, &small_spec(2)).unwrap();
        assert_eq!(out.reports.len(), 4 * 4);
        for r in &out.reports {
            assert!(r.perf_ratio >= 1.0, "{r:?}");
            assert!(r.eval_ratio > 0.0 && r.eval_ratio <= 1.0);
            assert_eq!(r.identical, r.rs_best_id == r.sqrs_best_id);
            assert!(r.sqrs_evaluations <= 120);
            assert_eq!(r.rs_fits, 120);
        }
        let aggs = aggregate(&out.reports);
        assert_eq!(aggs.len(), 4);
        assert!(aggs.iter().all(|a| a.replications == 4));
    }

    #[test]
    fn output_does_not_depend_on_thread_count() {
        let ds = make_synthetic(SyntheticKind::LinearRegression, 80, 3, 1.0, 2).unwrap();
        let space = LearnerKind::CartTree.default_space();
        let csv = |jobs| {
            let spec = PairedSpec {
                shift: 0.0,
                ..small_spec(jobs)
            };
            let out = paired_compare(&space, &ds, &spec).unwrap();
            let mut a = Vec::new();
            let mut b = Vec::new();
            write_reports_csv(&out.reports, &mut a).unwrap();
            write_decision_log_csv(&out, &mut b).unwrap();
            (a, b)
        };
        assert_eq!(csv(1), csv(3));
    }

    #[test]
    fn ratio_conventions() {
        assert_eq!(ratio(0.0, 0.0), 1.0);
        assert_eq!(ratio(0.1, 0.0), f64::INFINITY);
        assert_eq!(ratio(0.3, 0.2), 1.4999999999999998);
    }

    #[test]
    fn rejects_degenerate_specs() {
        let ds = make_synthetic(SyntheticKind::LinearRegression, 40, 2, 1.0, 2).unwrap();
        let space = LearnerKind::CartTree.default_space();
        let spec = PairedSpec {
            n_configs: 1,
            ..small_spec(1)
        };
        assert!(paired_compare(&space, &ds, &spec).is_err());
    }
}
