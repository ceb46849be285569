//! Tabular datasets loaded from CSV or generated synthetically.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream;

pub const MIN_ROWS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Classification,
    Regression,
}

impl TaskKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::Classification => "classification",
            TaskKind::Regression => "regression",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnType {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Numeric(Vec<f64>),
    /// `levels` are sorted; `codes[i]` indexes into them.
    Categorical {
        levels: Vec<String>,
        codes: Vec<u32>,
    },
}

impl Column {
    pub fn column_type(&self) -> ColumnType {
        match self {
            Column::Numeric(_) => ColumnType::Numeric,
            Column::Categorical { .. } => ColumnType::Categorical,
        }
    }

    fn cell(&self, row: usize) -> String {
        match self {
            Column::Numeric(v) => v[row].to_string(),
            Column::Categorical { levels, codes } => levels[codes[row] as usize].clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Feature {
    pub name: String,
    pub column: Column,
}

/// How to interpret a CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvSchema {
    pub target: String,
    pub task_kind: TaskKind,
    #[serde(default)]
    pub column_types: BTreeMap<String, ColumnType>,
}

impl CsvSchema {
    pub fn new(target: &str, task_kind: TaskKind) -> Self {
        Self {
            target: target.to_string(),
            task_kind,
            column_types: BTreeMap::new(),
        }
    }
}

/// An immutable learning task.
///
/// Classification targets are stored as `0.0`/`1.0`; the two original labels
/// are mapped by sorted order (numerically when both parse as numbers,
/// lexicographically otherwise) and kept in `class_labels`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<Feature>,
    target: Vec<f64>,
    target_name: String,
    class_labels: Option<[String; 2]>,
    task: TaskKind,
}

impl Dataset {
    pub fn new(
        features: Vec<Feature>,
        target_name: &str,
        target: Vec<f64>,
        task: TaskKind,
        class_labels: Option<[String; 2]>,
    ) -> Result<Self> {
        let n = target.len();
        if n < MIN_ROWS {
            return Err(Error::InvalidDataset(format!(
                "{n} rows, at least {MIN_ROWS} required"
            )));
        }
        for f in &features {
            let len = match &f.column {
                Column::Numeric(v) => v.len(),
                Column::Categorical { codes, .. } => codes.len(),
            };
            if len != n {
                return Err(Error::InvalidDataset(format!(
                    "column `{}` has {len} rows, target has {n}",
                    f.name
                )));
            }
        }
        if target.iter().any(|y| !y.is_finite()) {
            return Err(Error::InvalidDataset("non-finite target value".into()));
        }
        if task == TaskKind::Classification && target.iter().any(|&y| y != 0.0 && y != 1.0) {
            return Err(Error::InvalidDataset(
                "classification targets must be 0 or 1".into(),
            ));
        }
        let class_labels = match task {
            TaskKind::Classification => {
                Some(class_labels.unwrap_or_else(|| ["0".to_string(), "1".to_string()]))
            }
            TaskKind::Regression => None,
        };
        Ok(Self {
            features,
            target,
            target_name: target_name.to_string(),
            class_labels,
            task,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.target.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    pub fn task(&self) -> TaskKind {
        self.task
    }

    pub fn class_labels(&self) -> Option<&[String; 2]> {
        self.class_labels.as_ref()
    }

    /// Content hash used to tie a resampling instance to its dataset.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |bytes: &[u8]| {
            for b in bytes {
                h ^= u64::from(*b);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        eat(self.task.as_str().as_bytes());
        for f in &self.features {
            eat(f.name.as_bytes());
            match &f.column {
                Column::Numeric(v) => v.iter().for_each(|x| eat(&x.to_bits().to_le_bytes())),
                Column::Categorical { levels, codes } => {
                    levels.iter().for_each(|l| eat(l.as_bytes()));
                    codes.iter().for_each(|c| eat(&c.to_le_bytes()));
                }
            }
        }
        self.target
            .iter()
            .for_each(|y| eat(&y.to_bits().to_le_bytes()));
        h
    }

    pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())?;
        Self::from_csv_reader(file, schema)
    }

    pub fn from_csv_reader<R: Read>(reader: R, schema: &CsvSchema) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let target_idx = header
            .iter()
            .position(|h| *h == schema.target)
            .ok_or_else(|| Error::MissingTarget(schema.target.clone()))?;
        for name in schema.column_types.keys() {
            if !header.contains(name) {
                return Err(Error::InvalidDataset(format!(
                    "type override for unknown column `{name}`"
                )));
            }
        }

        let mut cells: Vec<Vec<String>> = vec![Vec::new(); header.len()];
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            // data rows are numbered from 1, the header is row 0
            let row = i + 1;
            if record.len() != header.len() {
                return Err(Error::Parse {
                    row,
                    column: String::new(),
                    message: format!("expected {} fields, found {}", header.len(), record.len()),
                });
            }
            for (j, cell) in record.iter().enumerate() {
                let cell = cell.trim();
                if cell.is_empty() {
                    return Err(Error::Parse {
                        row,
                        column: header[j].clone(),
                        message: "missing value".into(),
                    });
                }
                cells[j].push(cell.to_string());
            }
        }

        let parse_numeric = |j: usize| -> Result<Vec<f64>> {
            cells[j]
                .iter()
                .enumerate()
                .map(|(i, s)| match s.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(Error::Parse {
                        row: i + 1,
                        column: header[j].clone(),
                        message: format!("cannot parse `{s}` as a number"),
                    }),
                })
                .collect()
        };

        let (target, class_labels) = match schema.task_kind {
            TaskKind::Regression => (parse_numeric(target_idx)?, None),
            TaskKind::Classification => {
                let labels = sorted_labels(&cells[target_idx]);
                if labels.len() != 2 {
                    return Err(Error::TargetNotBinary(labels.len()));
                }
                let y = cells[target_idx]
                    .iter()
                    .map(|s| if *s == labels[0] { 0.0 } else { 1.0 })
                    .collect();
                (y, Some([labels[0].clone(), labels[1].clone()]))
            }
        };

        let mut features = Vec::with_capacity(header.len() - 1);
        for (j, name) in header.iter().enumerate() {
            if j == target_idx {
                continue;
            }
            let all_numeric = || {
                cells[j]
                    .iter()
                    .all(|s| s.parse::<f64>().is_ok_and(f64::is_finite))
            };
            let kind = match schema.column_types.get(name) {
                Some(k) => *k,
                None if all_numeric() => ColumnType::Numeric,
                None => ColumnType::Categorical,
            };
            let column = match kind {
                ColumnType::Numeric => Column::Numeric(parse_numeric(j)?),
                ColumnType::Categorical => categorical(&cells[j]),
            };
            features.push(Feature {
                name: name.clone(),
                column,
            });
        }

        Self::new(
            features,
            &schema.target,
            target,
            schema.task_kind,
            class_labels,
        )
    }

    /// Writes the dataset back as CSV with the target as the last column.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.features.iter().map(|f| f.name.as_str()).collect();
        header.push(&self.target_name);
        w.write_record(&header)?;
        for i in 0..self.n_rows() {
            let mut rec: Vec<String> = self.features.iter().map(|f| f.column.cell(i)).collect();
            rec.push(match &self.class_labels {
                Some(labels) => labels[self.target[i] as usize].clone(),
                None => self.target[i].to_string(),
            });
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Schema that reloads a written dataset with the same column types.
    pub fn schema(&self) -> CsvSchema {
        CsvSchema {
            target: self.target_name.clone(),
            task_kind: self.task,
            column_types: self
                .features
                .iter()
                .map(|f| (f.name.clone(), f.column.column_type()))
                .collect(),
        }
    }
}

fn sorted_labels(values: &[String]) -> Vec<String> {
    let distinct: BTreeSet<&String> = values.iter().collect();
    let mut labels: Vec<String> = distinct.into_iter().cloned().collect();
    let numeric: Option<Vec<f64>> = labels.iter().map(|s| s.parse::<f64>().ok()).collect();
    if let Some(nums) = numeric {
        let mut pairs: Vec<(f64, String)> = nums.into_iter().zip(labels).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        labels = pairs.into_iter().map(|(_, s)| s).collect();
    }
    labels
}

fn categorical(values: &[String]) -> Column {
    let levels: Vec<String> = values
        .iter()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .cloned()
        .collect();
    let codes = values
        .iter()
        .map(|v| levels.binary_search(v).expect("level present") as u32)
        .collect();
    Column::Categorical { levels, codes }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticKind {
    LinearRegression,
    TwoGaussiansClassification,
}

/// Generating coefficients of the linear synthetic task: `1, -2, 3, -4, ...`
/// scaled by `1/2`.
pub fn linear_coefficients(p: usize) -> Vec<f64> {
    (0..p)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * (j + 1) as f64 / 2.0
        })
        .collect()
}

/// Distance between the two class means along every axis.
pub const CLUSTER_SEPARATION: f64 = 2.0;

/// Deterministic synthetic tasks.
///
/// * `LinearRegression`: `x ~ N(0, I)`, `y = x·β + ε` with
///   [`linear_coefficients`] and `ε ~ N(0, noise²)`.
/// * `TwoGaussiansClassification`: rows alternate between class 0 and 1;
///   class means sit at `∓CLUSTER_SEPARATION/2` on every axis with isotropic
///   spread `noise`, so overlap is controlled by `noise`.
pub fn make_synthetic(
    kind: SyntheticKind,
    n: usize,
    p: usize,
    noise: f64,
    seed: u64,
) -> Result<Dataset> {
    if n < MIN_ROWS || p == 0 || !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "synthetic data needs n >= {MIN_ROWS}, p >= 1, noise >= 0 (got n={n}, p={p}, noise={noise})"
        )));
    }
    let mut rng = stream(seed, "synthetic", 0);
    let mut cols = vec![Vec::with_capacity(n); p];
    let mut y = Vec::with_capacity(n);
    match kind {
        SyntheticKind::LinearRegression => {
            let beta = linear_coefficients(p);
            for _ in 0..n {
                let mut acc = 0.0;
                for (j, col) in cols.iter_mut().enumerate() {
                    let x: f64 = rng.sample(StandardNormal);
                    acc += beta[j] * x;
                    col.push(x);
                }
                let eps: f64 = rng.sample(StandardNormal);
                y.push(acc + noise * eps);
            }
        }
        SyntheticKind::TwoGaussiansClassification => {
            for i in 0..n {
                let label = (i % 2) as f64;
                let center = (label - 0.5) * CLUSTER_SEPARATION;
                for col in cols.iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    col.push(center + noise * z);
                }
                y.push(label);
            }
        }
    }
    let features = cols
        .into_iter()
        .enumerate()
        .map(|(j, v)| Feature {
            name: format!("x{}", j + 1),
            column: Column::Numeric(v),
        })
        .collect();
    let task = match kind {
        SyntheticKind::LinearRegression => TaskKind::Regression,
        SyntheticKind::TwoGaussiansClassification => TaskKind::Classification,
    };
    Dataset::new(features, "y", y, task, None)
}
