use std::io::Write;

use rayon::prelude::*;

use super::{shift_search, DistFamily, FitResult};
use crate::data::{Dataset, TaskKind};
use crate::error::{Error, Result};
use crate::learners::LearnerKind;
use crate::param_space::{Config, ParamSpace};
use crate::resampling::{evaluate, EvalCache, ResamplingInstance};
use crate::rng::stream;

pub const MIN_BOOT: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub config_id: u64,
    pub fit: FitResult,
}

/// A (config, family) cell without a usable fit.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyFailure {
    pub config_id: u64,
    pub family: DistFamily,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilySummary {
    pub family: DistFamily,
    pub median_cvm: f64,
    pub fits: usize,
}

#[derive(Debug, Clone)]
pub struct DistStudy {
    pub task: TaskKind,
    pub configs: Vec<Config>,
    /// Bootstrap losses per config, in partition order.
    pub losses: Vec<Vec<f64>>,
    pub rows: Vec<StudyRow>,
    pub failures: Vec<StudyFailure>,
}

/// For each of `n_configs` sampled configurations, computes `n_boot`
/// bootstrap losses on fresh partitions and fits every family of the task
/// at its best shift.
pub fn dist_study(
    data: &Dataset,
    kind: LearnerKind,
    space: &ParamSpace,
    n_configs: usize,
    n_boot: usize,
    seed: u64,
) -> Result<DistStudy> {
    if n_boot < MIN_BOOT {
        return Err(Error::InvalidArgument(format!(
            "n_boot must be at least {MIN_BOOT}, got {n_boot}"
        )));
    }
    if n_configs == 0 {
        return Err(Error::InvalidArgument("n_configs must be positive".into()));
    }
    let configs = space.sample_configs(&mut stream(seed, "configs", 0), n_configs, 0);
    let instance = ResamplingInstance::fresh(data.n_rows(), n_boot, seed)?.for_dataset(data)?;
    let families = DistFamily::for_task(data.task());

    let per_config: Vec<(Vec<f64>, Vec<StudyRow>, Vec<StudyFailure>)> = configs
        .par_iter()
        .map(|cfg| {
            let mut cache = EvalCache::new();
            let losses = (0..n_boot)
                .map(|k| evaluate(cfg, kind, data, &instance, k, &mut cache))
                .collect::<Result<Vec<f64>>>()?;
            let mut rows = Vec::new();
            let mut failures = Vec::new();
            for &family in &families {
                match shift_search(&losses, family) {
                    Ok(fit) => rows.push(StudyRow {
                        config_id: cfg.id,
                        fit,
                    }),
                    Err(
                        e @ (Error::Support { .. }
                        | Error::NoAdmissibleShift(_)
                        | Error::NonConvergence { .. }),
                    ) => failures.push(StudyFailure {
                        config_id: cfg.id,
                        family,
                        message: e.to_string(),
                    }),
                    Err(e) => return Err(e),
                }
            }
            Ok((losses, rows, failures))
        })
        .collect::<Result<_>>()?;

    let mut study = DistStudy {
        task: data.task(),
        configs,
        losses: Vec::new(),
        rows: Vec::new(),
        failures: Vec::new(),
    };
    for (losses, rows, failures) in per_config {
        study.losses.push(losses);
        study.rows.extend(rows);
        study.failures.extend(failures);
    }
    Ok(study)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

impl DistStudy {
    /// Families ranked by median criterion, best first.
    pub fn summary(&self) -> Vec<FamilySummary> {
        let mut out: Vec<FamilySummary> = DistFamily::for_task(self.task)
            .into_iter()
            .filter_map(|family| {
                let cvms: Vec<f64> = self
                    .rows
                    .iter()
                    .filter(|r| r.fit.family == family)
                    .map(|r| r.fit.cvm)
                    .collect();
                (!cvms.is_empty()).then(|| FamilySummary {
                    family,
                    fits: cvms.len(),
                    median_cvm: median(cvms),
                })
            })
            .collect();
        out.sort_by(|a, b| {
            a.median_cvm
                .total_cmp(&b.median_cvm)
                .then(a.family.cmp(&b.family))
        });
        out
    }

    pub fn median_cvm(&self, family: DistFamily) -> Option<f64> {
        self.summary()
            .into_iter()
            .find(|s| s.family == family)
            .map(|s| s.median_cvm)
    }

    /// `config_id,family,c,loglik,cvm,param1,param2`
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "config_id",
            "family",
            "c",
            "loglik",
            "cvm",
            "param1",
            "param2",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.config_id.to_string(),
                r.fit.family.to_string(),
                r.fit.shift.to_string(),
                r.fit.loglik.to_string(),
                r.fit.cvm.to_string(),
                r.fit.params[0].to_string(),
                r.fit.params[1].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// `rank,family,median_cvm,fits`
    pub fn write_summary_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["rank", "family", "median_cvm", "fits"])?;
        for (i, s) in self.summary().iter().enumerate() {
            w.write_record([
                (i + 1).to_string(),
                s.family.to_string(),
                s.median_cvm.to_string(),
                s.fits.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// `config_id,family,message`
    pub fn write_failures_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["config_id", "family", "message"])?;
        for f in &self.failures {
            w.write_record([
                f.config_id.to_string(),
                f.family.to_string(),
                f.message.clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
