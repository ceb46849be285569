//! Random search, sequential random search (SQRS) and the paired harness
//! comparing the two on shared resampling instances.

mod paired;

use std::collections::BTreeSet;
use std::io::Write;
use std::time::{Duration, Instant};

use rand::Rng;

use crate::data::{Dataset, TaskKind};
use crate::error::{Error, Result};
use crate::learners::LearnerKind;
use crate::param_space::{Config, ParamSpace};
use crate::resampling::{evaluate, EvalCache, InstanceMode, ResamplingInstance};
use crate::seqtest::{slrt_step, transform_loss, Decision, Hypothesis, SlrtConfig, SlrtState};

pub use paired::{
    aggregate, paired_compare, write_aggregate_csv, write_decision_log_csv, write_reports_csv,
    PairedOutcome, PairedReport, PairedSpec, SettingAggregate,
};

/// Additive shift applied to losses before testing: 0.5 for error rates,
/// 0 for squared errors.
pub fn default_shift(task: TaskKind) -> f64 {
    match task {
        TaskKind::Classification => 0.5,
        TaskKind::Regression => 0.0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RsResult {
    pub best: Config,
    /// Mean loss of `best` over all `K` partitions.
    pub best_mean: f64,
    pub configs: Vec<Config>,
    /// `table[i][k]`: loss of `configs[i]` on partition `k`.
    pub table: Vec<Vec<f64>>,
    /// Learner trainings performed (cache misses).
    pub fits: usize,
}

impl RsResult {
    pub fn mean_loss(&self, config_id: u64) -> Option<f64> {
        self.configs
            .iter()
            .position(|c| c.id == config_id)
            .map(|i| mean(&self.table[i]))
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Samples `n_configs` configurations and evaluates each on every partition
/// of `instance`.
pub fn random_search<R: Rng + ?Sized>(
    space: &ParamSpace,
    kind: LearnerKind,
    data: &Dataset,
    instance: &ResamplingInstance,
    n_configs: usize,
    rng: &mut R,
    cache: &mut EvalCache,
) -> Result<RsResult> {
    if n_configs == 0 {
        return Err(Error::InvalidArgument("n_configs must be positive".into()));
    }
    let configs = space.sample_configs(rng, n_configs, 0);
    random_search_over(configs, kind, data, instance, cache)
}

/// Full evaluation of the given configurations; the smallest mean loss wins,
/// ties going to the lower config id.
pub fn random_search_over(
    configs: Vec<Config>,
    kind: LearnerKind,
    data: &Dataset,
    instance: &ResamplingInstance,
    cache: &mut EvalCache,
) -> Result<RsResult> {
    if configs.is_empty() {
        return Err(Error::InvalidArgument(
            "no configurations to evaluate".into(),
        ));
    }
    let fits_before = cache.fits();
    let table = configs
        .iter()
        .map(|cfg| {
            (0..instance.k())
                .map(|k| evaluate(cfg, kind, data, instance, k, cache))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let (best_idx, best_mean) = table
        .iter()
        .map(|row| mean(row))
        .enumerate()
        .min_by(|(i, a), (j, b)| a.total_cmp(b).then(configs[*i].id.cmp(&configs[*j].id)))
        .expect("non-empty");
    Ok(RsResult {
        best: configs[best_idx].clone(),
        best_mean,
        configs,
        table,
        fits: cache.fits() - fits_before,
    })
}

/// Stops a free-standing SQRS run; `None` fields are unlimited.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Termination {
    pub max_candidates: Option<usize>,
    pub time_budget: Option<Duration>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqrsOptions {
    pub slrt: SlrtConfig,
    /// Additive shift `c` applied to every loss.
    pub shift: f64,
    /// Test `ln(loss + c)` instead of `loss + c`.
    pub log_transform: bool,
    pub termination: Termination,
}

impl SqrsOptions {
    pub fn new(slrt: SlrtConfig, task: TaskKind) -> Self {
        Self {
            slrt,
            shift: default_shift(task),
            log_transform: true,
            termination: Termination::default(),
        }
    }
}

/// One incumbent-versus-candidate duel.
#[derive(Debug, Clone, PartialEq)]
pub struct Duel {
    pub incumbent_id: u64,
    pub candidate_id: u64,
    pub decision: Decision,
    /// Whether the candidate became the incumbent.
    pub replaced: bool,
    pub steps: usize,
    pub z: f64,
    pub bound: f64,
    /// Running means of the shifted (untransformed) losses at the last step.
    pub incumbent_mean: f64,
    pub candidate_mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SqrsResult {
    pub incumbent: Config,
    pub duels: Vec<Duel>,
    /// Distinct `(config, partition)` losses the run needed.
    pub evaluations: usize,
    /// Learner trainings performed during the run (cache misses).
    pub fits: usize,
    pub candidates_seen: usize,
}

impl SqrsResult {
    /// `evaluations / budget`, e.g. against the random-search budget `n_configs · K`.
    pub fn eval_ratio(&self, budget: usize) -> f64 {
        self.evaluations as f64 / budget as f64
    }
}

/// Sequential random search: the first candidate becomes the incumbent and
/// each later one duels it with the sequential test, one resampling
/// partition per step. A forced decision at `n_max` keeps whichever
/// configuration has the smaller running mean of shifted losses (the
/// incumbent on exact ties).
pub fn sqrs(
    candidates: &[Config],
    kind: LearnerKind,
    data: &Dataset,
    instance: &ResamplingInstance,
    options: &SqrsOptions,
    cache: &mut EvalCache,
) -> Result<SqrsResult> {
    let slrt = options.slrt.validated()?;
    let Some(first) = candidates.first() else {
        return Err(Error::InvalidArgument(
            "SQRS needs at least one candidate".into(),
        ));
    };
    if slrt.n_max > instance.k() {
        return Err(Error::InvalidArgument(format!(
            "n_max = {} exceeds the {} available partitions",
            slrt.n_max,
            instance.k()
        )));
    }
    if instance.mode() == InstanceMode::Fixed && instance.partitions().is_empty() {
        return Err(Error::InvalidArgument("empty resampling instance".into()));
    }
    let started = Instant::now();
    let fits_before = cache.fits();
    let mut touched = BTreeSet::new();
    let mut incumbent = first;
    let mut duels = Vec::new();
    let mut seen = 1;

    for candidate in &candidates[1..] {
        if options
            .termination
            .max_candidates
            .is_some_and(|m| seen >= m)
            || options
                .termination
                .time_budget
                .is_some_and(|t| started.elapsed() >= t)
        {
            break;
        }
        seen += 1;
        let mut state = SlrtState::new();
        let (mut sum_u, mut sum_w) = (0.0, 0.0);
        let mut n = 0;
        let duel = loop {
            let lu = evaluate(incumbent, kind, data, instance, n, cache)? + options.shift;
            let lw = evaluate(candidate, kind, data, instance, n, cache)? + options.shift;
            touched.insert((incumbent.id, n));
            touched.insert((candidate.id, n));
            sum_u += lu;
            sum_w += lw;
            n += 1;
            let step = slrt_step(
                &mut state,
                transform_loss(lu, 0.0, options.log_transform)?,
                transform_loss(lw, 0.0, options.log_transform)?,
                &slrt,
            )?;
            if !step.decision.is_final() {
                continue;
            }
            let (mu, mw) = (sum_u / n as f64, sum_w / n as f64);
            let decision = match step.decision {
                Decision::Forced(_) if mw < mu => Decision::Forced(Hypothesis::H1),
                Decision::Forced(_) => Decision::Forced(Hypothesis::H0),
                d => d,
            };
            break Duel {
                incumbent_id: incumbent.id,
                candidate_id: candidate.id,
                decision,
                replaced: decision.outcome() == Some(Hypothesis::H1),
                steps: n,
                z: step.z,
                bound: step.bound,
                incumbent_mean: mu,
                candidate_mean: mw,
            };
        };
        if duel.replaced {
            incumbent = candidate;
        }
        duels.push(duel);
    }
    Ok(SqrsResult {
        incumbent: incumbent.clone(),
        duels,
        evaluations: touched.len(),
        fits: cache.fits() - fits_before,
        candidates_seen: seen,
    })
}

/// CSV with one row per duel.
pub fn write_duels_csv<W: Write>(duels: &[Duel], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(DUEL_HEADER)?;
    for (i, d) in duels.iter().enumerate() {
        w.write_record(duel_record(i, d))?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) const DUEL_HEADER: [&str; 10] = [
    "duel",
    "incumbent_id",
    "candidate_id",
    "decision",
    "replaced",
    "steps",
    "z",
    "bound",
    "incumbent_mean",
    "candidate_mean",
];

pub(crate) fn duel_record(i: usize, d: &Duel) -> [String; 10] {
    [
        i.to_string(),
        d.incumbent_id.to_string(),
        d.candidate_id.to_string(),
        d.decision.label().to_string(),
        d.replaced.to_string(),
        d.steps.to_string(),
        d.z.to_string(),
        d.bound.to_string(),
        d.incumbent_mean.to_string(),
        d.candidate_mean.to_string(),
    ]
}
