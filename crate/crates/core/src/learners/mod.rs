//! Learners with tunable hyperparameters.
//!
//! Both learners train on a multiset of row indices of a [`Dataset`], which
//! is how bootstrap training samples are represented.

mod elastic_net;
mod tree;

use serde::{Deserialize, Serialize};

pub use elastic_net::{ElasticNetModel, ElasticNetParams, FitTrace};
pub use tree::{TreeModel, TreeNode, TreeParams};

use crate::data::{ColumnType, Dataset, TaskKind};
use crate::error::{Error, Result};
use crate::param_space::{Config, ParamDef, ParamSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    /// Penalised linear / logistic regression; hyperparameters `alpha`, `lambda`.
    ElasticNet,
    /// Binary decision tree with cost-complexity pruning; `cp`, `maxdepth`.
    CartTree,
}

impl LearnerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LearnerKind::ElasticNet => "elastic_net",
            LearnerKind::CartTree => "cart_tree",
        }
    }

    pub fn hyperparameter_names(self) -> &'static [&'static str] {
        match self {
            LearnerKind::ElasticNet => &["alpha", "lambda"],
            LearnerKind::CartTree => &["cp", "maxdepth"],
        }
    }

    /// The tuning ranges used throughout: `alpha ∈ [0, 1]`,
    /// `lambda = 2^x, x ∈ [-15, 15]`, `cp ∈ [0, 0.5]`, `maxdepth ∈ {1..30}`.
    pub fn default_space(self) -> ParamSpace {
        let params = match self {
            LearnerKind::ElasticNet => vec![
                ParamDef::continuous("alpha", 0.0, 1.0),
                ParamDef::log2("lambda", -15.0, 15.0),
            ],
            LearnerKind::CartTree => vec![
                ParamDef::continuous("cp", 0.0, 0.5),
                ParamDef::integer("maxdepth", 1, 30),
            ],
        };
        ParamSpace::new(
            params
                .into_iter()
                .collect::<Result<_>>()
                .expect("static space"),
        )
        .expect("static space")
    }

    pub fn fit(self, cfg: &Config, data: &Dataset, rows: &[usize]) -> Result<Model> {
        if rows.is_empty() {
            return Err(Error::InvalidDataset("cannot fit on zero rows".into()));
        }
        if let Some(&bad) = rows.iter().find(|&&r| r >= data.n_rows()) {
            return Err(Error::InvalidArgument(format!(
                "row index {bad} out of range"
            )));
        }
        match self {
            LearnerKind::ElasticNet => {
                let params = ElasticNetParams::from_config(cfg)?;
                Ok(Model::ElasticNet(ElasticNetModel::fit(
                    &params, data, rows,
                )?))
            }
            LearnerKind::CartTree => {
                let params = TreeParams::from_config(cfg)?;
                Ok(Model::Tree(TreeModel::fit(&params, data, rows)?))
            }
        }
    }
}

/// Names and column types of the features a model was trained on.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSchema {
    columns: Vec<(String, ColumnType)>,
}

impl FeatureSchema {
    pub fn of(data: &Dataset) -> Self {
        Self {
            columns: data
                .features()
                .iter()
                .map(|f| (f.name.clone(), f.column.column_type()))
                .collect(),
        }
    }

    fn check(&self, data: &Dataset) -> Result<()> {
        let other = Self::of(data);
        if *self != other {
            return Err(Error::SchemaMismatch(format!(
                "model trained on {:?}, got {:?}",
                self.columns, other.columns
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub enum Model {
    ElasticNet(ElasticNetModel),
    Tree(TreeModel),
}

impl Model {
    pub fn task(&self) -> TaskKind {
        match self {
            Model::ElasticNet(m) => m.task(),
            Model::Tree(m) => m.task(),
        }
    }

    /// Predictions for `rows`: hard `0/1` labels for classification, reals
    /// for regression.
    pub fn predict(&self, data: &Dataset, rows: &[usize]) -> Result<Vec<f64>> {
        if let Some(&bad) = rows.iter().find(|&&r| r >= data.n_rows()) {
            return Err(Error::InvalidArgument(format!(
                "row index {bad} out of range"
            )));
        }
        match self {
            Model::ElasticNet(m) => m.predict(data, rows),
            Model::Tree(m) => m.predict(data, rows),
        }
    }
}
