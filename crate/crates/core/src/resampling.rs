//! Bootstrap partitions, losses and the evaluation cache.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, TaskKind};
use crate::error::{Error, Result};
use crate::learners::LearnerKind;
use crate::param_space::Config;
use crate::rng::{derive_seed, stream};

const MAX_REDRAWS: usize = 100;

/// One bootstrap split: `train` is a multiset of `n` row indices drawn with
/// replacement, `test` the rows never drawn (sorted ascending).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl Partition {
    pub fn test_fraction(&self) -> f64 {
        self.test.len() as f64 / self.train.len() as f64
    }
}

/// Draws one bootstrap partition, redrawing while the out-of-bag set is empty.
pub fn bootstrap_partition<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Partition> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "bootstrap needs at least 2 rows, got {n}"
        )));
    }
    for _ in 0..MAX_REDRAWS {
        let train: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let mut drawn = vec![false; n];
        train.iter().for_each(|&r| drawn[r] = true);
        let test: Vec<usize> = (0..n).filter(|&r| !drawn[r]).collect();
        if !test.is_empty() {
            return Ok(Partition { train, test });
        }
    }
    Err(Error::InvalidArgument(format!(
        "no non-empty test set after {MAX_REDRAWS} bootstrap draws (n = {n})"
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceMode {
    /// `K` partitions drawn up front and shared by every configuration.
    Fixed,
    /// Partition `k` of configuration `id` is drawn on demand from
    /// `(seed, id, k)`, so configurations never share a split.
    Fresh,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResamplingInstance {
    n: usize,
    k: usize,
    seed: u64,
    mode: InstanceMode,
    partitions: Vec<Partition>,
    fingerprint: Option<u64>,
}

/// `K` fixed bootstrap partitions of `n` rows.
pub fn make_bootstrap_instance(n: usize, k: usize, seed: u64) -> Result<ResamplingInstance> {
    ResamplingInstance::fixed(n, k, seed)
}

impl ResamplingInstance {
    pub fn fixed(n: usize, k: usize, seed: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("K must be at least 1".into()));
        }
        let partitions = (0..k as u64)
            .map(|i| bootstrap_partition(n, &mut stream(seed, "bootstrap", i)))
            .collect::<Result<_>>()?;
        Ok(Self {
            n,
            k,
            seed,
            mode: InstanceMode::Fixed,
            partitions,
            fingerprint: None,
        })
    }

    /// On-demand partitions; `k` is the per-configuration budget.
    pub fn fresh(n: usize, k: usize, seed: u64) -> Result<Self> {
        if n < 2 || k == 0 {
            return Err(Error::InvalidArgument(format!(
                "fresh instance needs n >= 2 and K >= 1 (n = {n}, K = {k})"
            )));
        }
        Ok(Self {
            n,
            k,
            seed,
            mode: InstanceMode::Fresh,
            partitions: Vec::new(),
            fingerprint: None,
        })
    }

    /// Ties the instance to one dataset; `evaluate` then rejects any other.
    pub fn for_dataset(mut self, data: &Dataset) -> Result<Self> {
        if data.n_rows() != self.n {
            return Err(Error::InvalidArgument(format!(
                "instance has {} rows, dataset {}",
                self.n,
                data.n_rows()
            )));
        }
        self.fingerprint = Some(data.fingerprint());
        Ok(self)
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn mode(&self) -> InstanceMode {
        self.mode
    }

    pub fn fingerprint(&self) -> Option<u64> {
        self.fingerprint
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    /// Partition used for the `k`-th evaluation of configuration `config_id`.
    pub fn partition(&self, config_id: u64, k: usize) -> Result<std::borrow::Cow<'_, Partition>> {
        if k >= self.k {
            return Err(Error::InvalidArgument(format!(
                "partition index {k} out of range (K = {})",
                self.k
            )));
        }
        match self.mode {
            InstanceMode::Fixed => Ok(std::borrow::Cow::Borrowed(&self.partitions[k])),
            InstanceMode::Fresh => {
                let idx = derive_seed(config_id, "fresh-partition", k as u64);
                let mut rng = stream(self.seed, "fresh", idx);
                bootstrap_partition(self.n, &mut rng).map(std::borrow::Cow::Owned)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// Mean misclassification error.
    Mmce,
    /// Mean squared error.
    Mse,
}

impl LossKind {
    pub fn for_task(task: TaskKind) -> Self {
        match task {
            TaskKind::Classification => LossKind::Mmce,
            TaskKind::Regression => LossKind::Mse,
        }
    }
}

pub fn loss(y_true: &[f64], y_pred: &[f64], kind: LossKind) -> Result<f64> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch(y_true.len(), y_pred.len()));
    }
    if y_true.is_empty() {
        return Err(Error::InvalidArgument("loss of an empty vector".into()));
    }
    let total: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(y, p)| match kind {
            LossKind::Mmce => f64::from(u8::from(y != p)),
            LossKind::Mse => (y - p) * (y - p),
        })
        .sum();
    Ok(total / y_true.len() as f64)
}

/// Write-once store of `(config id, partition index) → loss`.
///
/// `fits` counts the learner trainings performed through [`evaluate`], i.e.
/// the number of cache misses.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalCache {
    values: BTreeMap<(u64, usize), f64>,
    fits: usize,
}

impl EvalCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, config_id: u64, k: usize) -> Option<f64> {
        self.values.get(&(config_id, k)).copied()
    }

    /// Stores a value; an existing entry is never overwritten.
    pub fn insert(&mut self, config_id: u64, k: usize, value: f64) -> f64 {
        *self.values.entry((config_id, k)).or_insert(value)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn fits(&self) -> usize {
        self.fits
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, usize, f64)> + '_ {
        self.values.iter().map(|(&(c, k), &v)| (c, k, v))
    }

    /// CSV with header `config_id,partition,loss`, sorted by key.
    pub fn export_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["config_id", "partition", "loss"])?;
        for (c, k, v) in self.iter() {
            w.write_record([c.to_string(), k.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn import_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if header != ["config_id", "partition", "loss"] {
            return Err(Error::InvalidArgument(format!(
                "unexpected cache header {header:?}"
            )));
        }
        let mut cache = Self::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let field = |j: usize, name: &str| -> Result<&str> {
                rec.get(j).ok_or_else(|| Error::Parse {
                    row: i + 1,
                    column: name.into(),
                    message: "missing field".into(),
                })
            };
            let bad = |name: &str| Error::Parse {
                row: i + 1,
                column: name.into(),
                message: "not a number".into(),
            };
            let c: u64 = field(0, "config_id")?
                .parse()
                .map_err(|_| bad("config_id"))?;
            let k: usize = field(1, "partition")?
                .parse()
                .map_err(|_| bad("partition"))?;
            let v: f64 = field(2, "loss")?.parse().map_err(|_| bad("loss"))?;
            cache.insert(c, k, v);
        }
        Ok(cache)
    }
}

/// Resampling loss of `cfg` on partition `k`, read from the cache when present.
pub fn evaluate(
    cfg: &Config,
    learner: LearnerKind,
    data: &Dataset,
    instance: &ResamplingInstance,
    k: usize,
    cache: &mut EvalCache,
) -> Result<f64> {
    if let Some(v) = cache.get(cfg.id, k) {
        return Ok(v);
    }
    if instance.n_rows() != data.n_rows() {
        return Err(Error::InvalidArgument(format!(
            "instance has {} rows, dataset {}",
            instance.n_rows(),
            data.n_rows()
        )));
    }
    if let Some(fp) = instance.fingerprint() {
        if fp != data.fingerprint() {
            return Err(Error::InvalidArgument(
                "resampling instance belongs to a different dataset".into(),
            ));
        }
    }
    let part = instance.partition(cfg.id, k)?;
    let model = learner.fit(cfg, data, &part.train)?;
    let pred = model.predict(data, &part.test)?;
    let truth: Vec<f64> = part.test.iter().map(|&r| data.target()[r]).collect();
    let value = loss(&truth, &pred, LossKind::for_task(data.task()))?;
    cache.fits += 1;
    Ok(cache.insert(cfg.id, k, value))
}

/// Distinct rows of a training multiset.
pub fn distinct_rows(rows: &[usize]) -> BTreeSet<usize> {
    rows.iter().copied().collect()
}
