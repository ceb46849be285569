use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use seqtune_core::data::{ColumnType, CsvSchema, SyntheticKind};
use seqtune_core::{Dataset, LearnerKind, ParamSpace, Setting, SettingSpec, TaskKind};

/// Where the learning task comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum TaskSpec {
    Csv {
        path: PathBuf,
        target: String,
        task_kind: TaskKind,
        #[serde(default)]
        column_types: BTreeMap<String, ColumnType>,
    },
    Synthetic {
        kind: SyntheticKind,
        n: usize,
        p: usize,
        noise: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TunerConfig {
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_n_configs")]
    pub n_configs: usize,
    /// Settings compared by `compare`.
    #[serde(default = "default_settings")]
    pub settings: Vec<SettingSpec>,
    /// Setting used by `tune --algorithm sqrs`.
    #[serde(default = "default_sqrs_setting")]
    pub sqrs_setting: SettingSpec,
    /// Additive loss shift; defaults to 0.5 for classification, 0 for regression.
    #[serde(default)]
    pub shift: Option<f64>,
    #[serde(default = "default_true")]
    pub log_transform: bool,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub max_candidates: Option<usize>,
    #[serde(default)]
    pub time_budget_secs: Option<f64>,
}

impl Default for TunerConfig {
    fn default() -> Self {
        Self {
            k: default_k(),
            n_configs: default_n_configs(),
            settings: default_settings(),
            sqrs_setting: default_sqrs_setting(),
            shift: None,
            log_transform: true,
            replications: default_replications(),
            max_candidates: None,
            time_budget_secs: None,
        }
    }
}

fn default_k() -> usize {
    10
}
fn default_n_configs() -> usize {
    50
}
fn default_settings() -> Vec<SettingSpec> {
    Setting::ALL.into_iter().map(SettingSpec::from).collect()
}
fn default_sqrs_setting() -> SettingSpec {
    SettingSpec::Preset(Setting::A)
}
fn default_true() -> bool {
    true
}
fn default_replications() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistStudyConfig {
    #[serde(default = "default_study_configs")]
    pub n_configs: usize,
    #[serde(default = "default_n_boot")]
    pub n_boot: usize,
}

impl Default for DistStudyConfig {
    fn default() -> Self {
        Self {
            n_configs: default_study_configs(),
            n_boot: default_n_boot(),
        }
    }
}

fn default_study_configs() -> usize {
    10
}
fn default_n_boot() -> usize {
    200
}

/// One experiment, read from a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: TaskSpec,
    pub learner: LearnerKind,
    /// Search space; the learner's default ranges when absent.
    #[serde(default)]
    pub space: Option<ParamSpace>,
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub tuner: TunerConfig,
    #[serde(default)]
    pub dist_study: DistStudyConfig,
}

impl ExperimentConfig {
    /// Parses and validates a config; relative paths are resolved against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: Self = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let TaskSpec::Csv { path: p, .. } = &mut cfg.task {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(out) = &mut cfg.output_dir {
            if out.is_relative() {
                *out = base.join(&*out);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.tuner;
        if t.k < 2 {
            bail!("tuner.k must be at least 2");
        }
        if t.n_configs < 2 {
            bail!("tuner.n_configs must be at least 2");
        }
        if t.replications == 0 {
            bail!("tuner.replications must be positive");
        }
        if t.settings.is_empty() {
            bail!("tuner.settings must not be empty");
        }
        for s in t.settings.iter().chain([&t.sqrs_setting]) {
            s.config(t.k)
                .with_context(|| format!("setting `{}`", s.label()))?;
        }
        if let Some(c) = t.shift {
            if !c.is_finite() || c < 0.0 {
                bail!("tuner.shift must be a finite non-negative number");
            }
        }
        if let Some(secs) = t.time_budget_secs {
            if !(secs.is_finite() && secs > 0.0) {
                bail!("tuner.time_budget_secs must be positive");
            }
        }
        if self.dist_study.n_configs == 0 {
            bail!("dist_study.n_configs must be positive");
        }
        if let Some(space) = &self.space {
            for name in self.learner.hyperparameter_names() {
                if space.get(name).is_none() {
                    bail!(
                        "space lacks `{name}`, required by {}",
                        self.learner.as_str()
                    );
                }
            }
        }
        Ok(())
    }

    pub fn space(&self) -> ParamSpace {
        self.space
            .clone()
            .unwrap_or_else(|| self.learner.default_space())
    }

    pub fn load_dataset(&self) -> Result<Dataset> {
        match &self.task {
            TaskSpec::Csv {
                path,
                target,
                task_kind,
                column_types,
            } => {
                let schema = CsvSchema {
                    target: target.clone(),
                    task_kind: *task_kind,
                    column_types: column_types.clone(),
                };
                Dataset::load_csv(path, &schema)
                    .with_context(|| format!("loading {}", path.display()))
            }
            TaskSpec::Synthetic { kind, n, p, noise } => Ok(seqtune_core::data::make_synthetic(
                *kind, *n, *p, *noise, self.seed,
            )?),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "task": {"source": "synthetic", "kind": "linear_regression", "n": 50, "p": 3, "noise": 1.0},
        "learner": "cart_tree",
        "seed": 1
    }"#;

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg: ExperimentConfig = serde_json::from_str(MINIMAL).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.tuner.k, 10);
        assert_eq!(cfg.tuner.settings.len(), 4);
        assert_eq!(cfg.space().params().len(), 2);
        assert_eq!(cfg.load_dataset().unwrap().n_rows(), 50);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = MINIMAL.replace("\"seed\": 1", "\"seed\": 1, \"sede\": 2");
        assert!(serde_json::from_str::<ExperimentConfig>(&bad).is_err());
        let bad = MINIMAL.replace("\"noise\": 1.0", "\"noise\": 1.0, \"rows\": 3");
        assert!(serde_json::from_str::<ExperimentConfig>(&bad).is_err());
        let bad = MINIMAL.replace("\"seed\": 1", "\"seed\": 1, \"tuner\": {\"kk\": 3}");
        assert!(serde_json::from_str::<ExperimentConfig>(&bad).is_err());
    }

    #[test]
    fn invalid_values_fail_validation() {
        let bad = MINIMAL.replace("\"seed\": 1", "\"seed\": 1, \"tuner\": {\"k\": 1}");
        let cfg: ExperimentConfig = serde_json::from_str(&bad).unwrap();
        assert!(cfg.validate().is_err());
        let bad = MINIMAL.replace(
            "\"seed\": 1",
            "\"seed\": 1, \"space\": [{\"name\": \"cp\", \"kind\": \"continuous\", \"lo\": 0, \"hi\": 0.1}]",
        );
        let cfg: ExperimentConfig = serde_json::from_str(&bad).unwrap();
        assert!(cfg.validate().is_err());
    }
}
