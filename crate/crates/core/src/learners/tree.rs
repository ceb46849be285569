//! CART-style binary decision tree.
//!
//! Splits minimise weighted Gini impurity (classification) or the sum of
//! squared errors (regression). The tree is grown to `maxdepth` and then
//! pruned bottom-up: an internal node is collapsed when its subtree reduces
//! the node risk by less than `cp · R(root)` per additional leaf. Risk is the
//! misclassification count for classification and SSE for regression.
//!
//! Tie-breaking between equally good splits prefers the lowest feature index,
//! then the lowest threshold, which makes the fit independent of row order.

use std::cmp::Ordering;

use crate::data::{Column, Dataset, TaskKind};
use crate::error::{Error, Result};
use crate::param_space::Config;

use super::FeatureSchema;

pub const DEFAULT_MIN_SPLIT: usize = 20;
pub const DEFAULT_MIN_BUCKET: usize = 7;

/// Relative tolerance under which two split gains count as a tie.
const GAIN_TIE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    pub cp: f64,
    pub maxdepth: usize,
    /// Smallest node that may be split.
    pub min_split: usize,
    /// Smallest allowed child.
    pub min_bucket: usize,
}

impl TreeParams {
    pub fn new(cp: f64, maxdepth: usize) -> Self {
        Self {
            cp,
            maxdepth,
            min_split: DEFAULT_MIN_SPLIT,
            min_bucket: DEFAULT_MIN_BUCKET,
        }
    }

    pub fn from_config(cfg: &Config) -> Result<Self> {
        let cp = cfg.real("cp")?;
        let maxdepth = cfg.int("maxdepth")?;
        if !(cp >= 0.0 && cp.is_finite()) || maxdepth < 1 {
            return Err(Error::InvalidConfig(format!(
                "tree needs cp >= 0 and maxdepth >= 1, got cp={cp}, maxdepth={maxdepth}"
            )));
        }
        Ok(Self::new(cp, maxdepth as usize))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Split {
    /// `x <= threshold` goes left.
    Numeric { feature: usize, threshold: f64 },
    /// Levels in `left_levels` go left, those in `right_levels` go right;
    /// levels absent from the node's training rows follow the larger child.
    Categorical {
        feature: usize,
        left_levels: Vec<String>,
        right_levels: Vec<String>,
        unseen_left: bool,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Leaf {
        value: f64,
        n: usize,
    },
    Internal {
        split: Split,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
        n: usize,
    },
}

impl TreeNode {
    pub fn leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Internal { left, right, .. } => left.leaves() + right.leaves(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Internal { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TreeModel {
    task: TaskKind,
    schema: FeatureSchema,
    root: TreeNode,
}

/// Training columns aligned to the canonical row order.
enum TrainColumn {
    Numeric(Vec<f64>),
    Categorical {
        levels: Vec<String>,
        codes: Vec<u32>,
    },
}

struct Grower<'a> {
    params: &'a TreeParams,
    task: TaskKind,
    columns: Vec<TrainColumn>,
    y: Vec<f64>,
}

/// Node sufficient statistics: count, sum of targets, sum of squares.
#[derive(Debug, Clone, Copy, Default)]
struct Stats {
    n: f64,
    sum: f64,
    sum_sq: f64,
}

impl Stats {
    fn add(&mut self, y: f64) {
        self.n += 1.0;
        self.sum += y;
        self.sum_sq += y * y;
    }

    fn sub(&self, other: &Stats) -> Stats {
        Stats {
            n: self.n - other.n,
            sum: self.sum - other.sum,
            sum_sq: self.sum_sq - other.sum_sq,
        }
    }

    fn mean(&self) -> f64 {
        self.sum / self.n
    }

    /// Quantity minimised by splits: `n·gini` or SSE.
    fn impurity(&self, task: TaskKind) -> f64 {
        if self.n == 0.0 {
            return 0.0;
        }
        match task {
            TaskKind::Classification => {
                let c1 = self.sum;
                let c0 = self.n - c1;
                self.n - (c0 * c0 + c1 * c1) / self.n
            }
            TaskKind::Regression => (self.sum_sq - self.sum * self.sum / self.n).max(0.0),
        }
    }

    /// Risk used for pruning: misclassifications or SSE.
    fn risk(&self, task: TaskKind) -> f64 {
        match task {
            TaskKind::Classification => self.sum.min(self.n - self.sum),
            TaskKind::Regression => self.impurity(task),
        }
    }

    fn leaf_value(&self, task: TaskKind) -> f64 {
        match task {
            TaskKind::Classification => f64::from(u8::from(self.sum > self.n - self.sum)),
            TaskKind::Regression => self.mean(),
        }
    }
}

struct Candidate {
    gain: f64,
    split: Split,
    left: Vec<usize>,
    right: Vec<usize>,
}

fn better(gain: f64, best: &Option<Candidate>) -> bool {
    match best {
        None => gain > 0.0,
        Some(b) => gain > b.gain + GAIN_TIE * b.gain.abs().max(f64::MIN_POSITIVE),
    }
}

impl Grower<'_> {
    fn stats(&self, rows: &[usize]) -> Stats {
        let mut s = Stats::default();
        rows.iter().for_each(|&r| s.add(self.y[r]));
        s
    }

    fn grow(&self, rows: Vec<usize>, depth: usize) -> Annotated {
        let stats = self.stats(&rows);
        let splittable = depth < self.params.maxdepth
            && rows.len() >= self.params.min_split
            && stats.impurity(self.task) > 0.0;
        let split = splittable
            .then(|| self.best_split(&rows, &stats))
            .flatten()
            .map(|best| {
                (
                    best.split,
                    Box::new(self.grow(best.left, depth + 1)),
                    Box::new(self.grow(best.right, depth + 1)),
                )
            });
        Annotated { stats, split }
    }

    fn best_split(&self, rows: &[usize], parent: &Stats) -> Option<Candidate> {
        let parent_impurity = parent.impurity(self.task);
        let min_bucket = self.params.min_bucket.max(1) as f64;
        let mut best: Option<Candidate> = None;

        for (f, column) in self.columns.iter().enumerate() {
            match column {
                TrainColumn::Numeric(values) => {
                    let mut order = rows.to_vec();
                    order.sort_by(|&a, &b| {
                        values[a]
                            .total_cmp(&values[b])
                            .then(self.y[a].total_cmp(&self.y[b]))
                    });
                    let mut left = Stats::default();
                    for i in 0..order.len() - 1 {
                        left.add(self.y[order[i]]);
                        let (lo, hi) = (values[order[i]], values[order[i + 1]]);
                        if lo == hi || left.n < min_bucket || parent.n - left.n < min_bucket {
                            continue;
                        }
                        let right = parent.sub(&left);
                        let gain =
                            parent_impurity - left.impurity(self.task) - right.impurity(self.task);
                        if better(gain, &best) {
                            let mid = lo + (hi - lo) / 2.0;
                            let threshold = if mid < hi { mid } else { lo };
                            best = Some(Candidate {
                                gain,
                                split: Split::Numeric {
                                    feature: f,
                                    threshold,
                                },
                                left: order[..=i].to_vec(),
                                right: order[i + 1..].to_vec(),
                            });
                        }
                    }
                }
                TrainColumn::Categorical { levels, codes } => {
                    let mut per_level: Vec<(u32, Stats)> = Vec::new();
                    let mut sorted = rows.to_vec();
                    sorted.sort_by(|&a, &b| {
                        codes[a]
                            .cmp(&codes[b])
                            .then(self.y[a].total_cmp(&self.y[b]))
                    });
                    for &r in &sorted {
                        match per_level.last_mut() {
                            Some((code, s)) if *code == codes[r] => s.add(self.y[r]),
                            _ => {
                                let mut s = Stats::default();
                                s.add(self.y[r]);
                                per_level.push((codes[r], s));
                            }
                        }
                    }
                    if per_level.len() < 2 {
                        continue;
                    }
                    // ordering by mean response makes prefix splits optimal
                    per_level.sort_by(|a, b| {
                        a.1.mean()
                            .partial_cmp(&b.1.mean())
                            .unwrap_or(Ordering::Equal)
                            .then(a.0.cmp(&b.0))
                    });
                    let mut left = Stats::default();
                    for k in 0..per_level.len() - 1 {
                        let s = per_level[k].1;
                        left.n += s.n;
                        left.sum += s.sum;
                        left.sum_sq += s.sum_sq;
                        if left.n < min_bucket || parent.n - left.n < min_bucket {
                            continue;
                        }
                        let right = parent.sub(&left);
                        let gain =
                            parent_impurity - left.impurity(self.task) - right.impurity(self.task);
                        if better(gain, &best) {
                            let left_codes: Vec<u32> =
                                per_level[..=k].iter().map(|(c, _)| *c).collect();
                            let (l, r): (Vec<usize>, Vec<usize>) =
                                rows.iter().partition(|&&r| left_codes.contains(&codes[r]));
                            let mut left_levels: Vec<String> = left_codes
                                .iter()
                                .map(|&c| levels[c as usize].clone())
                                .collect();
                            left_levels.sort();
                            let mut right_levels: Vec<String> = per_level[k + 1..]
                                .iter()
                                .map(|(c, _)| levels[*c as usize].clone())
                                .collect();
                            right_levels.sort();
                            best = Some(Candidate {
                                gain,
                                split: Split::Categorical {
                                    feature: f,
                                    left_levels,
                                    right_levels,
                                    unseen_left: left.n >= right.n,
                                },
                                left: l,
                                right: r,
                            });
                        }
                    }
                }
            }
        }
        best
    }
}

impl TreeModel {
    pub fn fit(params: &TreeParams, data: &Dataset, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidDataset("cannot fit on zero rows".into()));
        }
        if params.maxdepth == 0 {
            return Err(Error::InvalidConfig("maxdepth must be at least 1".into()));
        }
        let canonical = canonical_order(data, rows);
        let columns = data
            .features()
            .iter()
            .map(|f| match &f.column {
                Column::Numeric(v) => {
                    TrainColumn::Numeric(canonical.iter().map(|&r| v[r]).collect())
                }
                Column::Categorical { levels, codes } => TrainColumn::Categorical {
                    levels: levels.clone(),
                    codes: canonical.iter().map(|&r| codes[r]).collect(),
                },
            })
            .collect();
        let y: Vec<f64> = canonical.iter().map(|&r| data.target()[r]).collect();
        let grower = Grower {
            params,
            task: data.task(),
            columns,
            y,
        };
        let mut tree = grower.grow((0..canonical.len()).collect(), 0);
        let root_risk = tree.stats.risk(data.task());
        if root_risk > 0.0 {
            prune(&mut tree, params.cp, root_risk, data.task());
        }
        let root = tree.into_node(data.task());
        Ok(Self {
            task: data.task(),
            schema: FeatureSchema::of(data),
            root,
        })
    }

    pub fn task(&self) -> TaskKind {
        self.task
    }

    pub fn root(&self) -> &TreeNode {
        &self.root
    }

    pub fn predict(&self, data: &Dataset, rows: &[usize]) -> Result<Vec<f64>> {
        self.schema.check(data)?;
        Ok(rows.iter().map(|&r| self.predict_row(data, r)).collect())
    }

    fn predict_row(&self, data: &Dataset, row: usize) -> f64 {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { value, .. } => return *value,
                TreeNode::Internal {
                    split, left, right, ..
                } => {
                    let go_left = match split {
                        Split::Numeric { feature, threshold } => {
                            match &data.features()[*feature].column {
                                Column::Numeric(v) => v[row] <= *threshold,
                                Column::Categorical { .. } => unreachable!("schema checked"),
                            }
                        }
                        Split::Categorical {
                            feature,
                            left_levels,
                            right_levels,
                            unseen_left,
                        } => match &data.features()[*feature].column {
                            Column::Categorical { levels, codes } => {
                                let level = &levels[codes[row] as usize];
                                left_levels.binary_search(level).is_ok()
                                    || (*unseen_left && right_levels.binary_search(level).is_err())
                            }
                            Column::Numeric(_) => unreachable!("schema checked"),
                        },
                    };
                    node = if go_left { left } else { right };
                }
            }
        }
    }
}

/// Tree annotated with node statistics, used for pruning.
struct Annotated {
    stats: Stats,
    split: Option<(Split, Box<Annotated>, Box<Annotated>)>,
}

impl Annotated {
    fn into_node(self, task: TaskKind) -> TreeNode {
        let n = self.stats.n as usize;
        match self.split {
            None => TreeNode::Leaf {
                value: self.stats.leaf_value(task),
                n,
            },
            Some((split, l, r)) => TreeNode::Internal {
                split,
                left: Box::new(l.into_node(task)),
                right: Box::new(r.into_node(task)),
                n,
            },
        }
    }
}

/// Returns (subtree risk, leaves) after pruning.
fn prune(node: &mut Annotated, cp: f64, root_risk: f64, task: TaskKind) -> (f64, usize) {
    let own = node.stats.risk(task);
    let Some((_, left, right)) = node.split.as_mut() else {
        return (own, 1);
    };
    let (rl, nl) = prune(left, cp, root_risk, task);
    let (rr, nr) = prune(right, cp, root_risk, task);
    let leaves = nl + nr;
    let complexity = (own - (rl + rr)) / (leaves - 1) as f64 / root_risk;
    if complexity < cp {
        node.split = None;
        (own, 1)
    } else {
        (rl + rr, leaves)
    }
}

/// Sorts training rows by content (target, then features) so that the fit
/// does not depend on the order in which rows are supplied.
fn canonical_order(data: &Dataset, rows: &[usize]) -> Vec<usize> {
    let mut order = rows.to_vec();
    let y = data.target();
    order.sort_by(|&a, &b| {
        let mut ord = y[a].total_cmp(&y[b]);
        for f in data.features() {
            if ord != Ordering::Equal {
                break;
            }
            ord = match &f.column {
                Column::Numeric(v) => v[a].total_cmp(&v[b]),
                Column::Categorical { levels, codes } => {
                    levels[codes[a] as usize].cmp(&levels[codes[b] as usize])
                }
            };
        }
        ord
    });
    order
}
