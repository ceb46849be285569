//! Hyperparameter search spaces and uniform sampling of configurations.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Domain of a single hyperparameter.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Continuous {
        lo: f64,
        hi: f64,
    },
    /// Closed integer range, both endpoints included.
    Integer {
        lo: i64,
        hi: i64,
    },
    Categorical {
        values: Vec<String>,
    },
    /// `2^x` with `x` uniform on `[lo_exp, hi_exp]`.
    Log2 {
        lo_exp: f64,
        hi_exp: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParamDef", into = "RawParamDef")]
pub struct ParamDef {
    pub name: String,
    pub domain: Domain,
}

/// JSON form: `{"name":"cp","kind":"continuous","lo":0,"hi":0.5}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParamDef {
    name: String,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<String>>,
}

impl TryFrom<RawParamDef> for ParamDef {
    type Error = Error;

    fn try_from(raw: RawParamDef) -> Result<Self> {
        let bounds = |kind: &str| -> Result<(f64, f64)> {
            match (raw.lo, raw.hi) {
                (Some(lo), Some(hi)) => Ok((lo, hi)),
                _ => Err(Error::InvalidSpace(format!(
                    "parameter `{}` of kind {kind} needs `lo` and `hi`",
                    raw.name
                ))),
            }
        };
        let domain = match raw.kind.as_str() {
            "continuous" => {
                let (lo, hi) = bounds("continuous")?;
                Domain::Continuous { lo, hi }
            }
            "integer" => {
                let (lo, hi) = bounds("integer")?;
                if lo.fract() != 0.0 || hi.fract() != 0.0 {
                    return Err(Error::InvalidSpace(format!(
                        "integer parameter `{}` has fractional bounds",
                        raw.name
                    )));
                }
                Domain::Integer {
                    lo: lo as i64,
                    hi: hi as i64,
                }
            }
            "log2" => {
                let (lo_exp, hi_exp) = bounds("log2")?;
                Domain::Log2 { lo_exp, hi_exp }
            }
            "categorical" => Domain::Categorical {
                values: raw.values.clone().ok_or_else(|| {
                    Error::InvalidSpace(format!(
                        "categorical parameter `{}` needs `values`",
                        raw.name
                    ))
                })?,
            },
            other => {
                return Err(Error::InvalidSpace(format!(
                    "unknown parameter kind `{other}`"
                )))
            }
        };
        let def = ParamDef {
            name: raw.name,
            domain,
        };
        def.check()?;
        Ok(def)
    }
}

impl From<ParamDef> for RawParamDef {
    fn from(def: ParamDef) -> Self {
        let (kind, lo, hi, values) = match def.domain {
            Domain::Continuous { lo, hi } => ("continuous", Some(lo), Some(hi), None),
            Domain::Integer { lo, hi } => ("integer", Some(lo as f64), Some(hi as f64), None),
            Domain::Log2 { lo_exp, hi_exp } => ("log2", Some(lo_exp), Some(hi_exp), None),
            Domain::Categorical { values } => ("categorical", None, None, Some(values)),
        };
        RawParamDef {
            name: def.name,
            kind: kind.to_string(),
            lo,
            hi,
            values,
        }
    }
}

impl ParamDef {
    pub fn continuous(name: &str, lo: f64, hi: f64) -> Result<Self> {
        Self::new(name, Domain::Continuous { lo, hi })
    }

    pub fn integer(name: &str, lo: i64, hi: i64) -> Result<Self> {
        Self::new(name, Domain::Integer { lo, hi })
    }

    pub fn log2(name: &str, lo_exp: f64, hi_exp: f64) -> Result<Self> {
        Self::new(name, Domain::Log2 { lo_exp, hi_exp })
    }

    pub fn categorical(name: &str, values: &[&str]) -> Result<Self> {
        Self::new(
            name,
            Domain::Categorical {
                values: values.iter().map(|s| s.to_string()).collect(),
            },
        )
    }

    pub fn new(name: &str, domain: Domain) -> Result<Self> {
        let def = ParamDef {
            name: name.to_string(),
            domain,
        };
        def.check()?;
        Ok(def)
    }

    fn check(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidSpace(format!("`{}`: {msg}", self.name)));
        match &self.domain {
            Domain::Continuous { lo, hi }
            | Domain::Log2 {
                lo_exp: lo,
                hi_exp: hi,
            } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return bad("requires finite lo < hi");
                }
            }
            Domain::Integer { lo, hi } => {
                if lo >= hi {
                    return bad("requires lo < hi");
                }
            }
            Domain::Categorical { values } => {
                if values.is_empty() {
                    return bad("categorical value list is empty");
                }
                let distinct: HashSet<_> = values.iter().collect();
                if distinct.len() != values.len() {
                    return bad("categorical values are not distinct");
                }
            }
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Value {
        match &self.domain {
            Domain::Continuous { lo, hi } => Value::Real(rng.random_range(*lo..=*hi)),
            Domain::Integer { lo, hi } => Value::Int(rng.random_range(*lo..=*hi)),
            Domain::Log2 { lo_exp, hi_exp } => {
                Value::Real(rng.random_range(*lo_exp..=*hi_exp).exp2())
            }
            Domain::Categorical { values } => {
                Value::Cat(values[rng.random_range(0..values.len())].clone())
            }
        }
    }

    pub fn contains(&self, value: &Value) -> bool {
        match (&self.domain, value) {
            (Domain::Continuous { lo, hi }, Value::Real(v)) => v.is_finite() && lo <= v && v <= hi,
            (Domain::Integer { lo, hi }, Value::Int(v)) => lo <= v && v <= hi,
            (Domain::Log2 { lo_exp, hi_exp }, Value::Real(v)) => {
                // exp2 rounding can land a hair outside the exact endpoints
                let slack = 1e-12;
                v.is_finite()
                    && *v > 0.0
                    && *v >= lo_exp.exp2() * (1.0 - slack)
                    && *v <= hi_exp.exp2() * (1.0 + slack)
            }
            (Domain::Categorical { values }, Value::Cat(v)) => values.contains(v),
            _ => false,
        }
    }
}

/// A single hyperparameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Real(f64),
    Cat(String),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Real(v) => Some(*v),
            Value::Int(v) => Some(*v as f64),
            Value::Cat(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Real(v) => write!(f, "{v}"),
            Value::Cat(v) => f.write_str(v),
        }
    }
}

/// A concrete hyperparameter vector with an experiment-local id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub id: u64,
    pub values: BTreeMap<String, Value>,
}

impl Config {
    pub fn get(&self, name: &str) -> Option<&Value> {
        self.values.get(name)
    }

    pub fn real(&self, name: &str) -> Result<f64> {
        self.get(name)
            .and_then(Value::as_f64)
            .ok_or_else(|| Error::InvalidConfig(format!("missing numeric value `{name}`")))
    }

    pub fn int(&self, name: &str) -> Result<i64> {
        match self.get(name) {
            Some(Value::Int(v)) => Ok(*v),
            _ => Err(Error::InvalidConfig(format!(
                "missing integer value `{name}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ParamDef>", into = "Vec<ParamDef>")]
pub struct ParamSpace {
    params: Vec<ParamDef>,
}

impl TryFrom<Vec<ParamDef>> for ParamSpace {
    type Error = Error;

    fn try_from(params: Vec<ParamDef>) -> Result<Self> {
        Self::new(params)
    }
}

impl From<ParamSpace> for Vec<ParamDef> {
    fn from(space: ParamSpace) -> Self {
        space.params
    }
}

impl ParamSpace {
    pub fn new(params: Vec<ParamDef>) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::InvalidSpace("no parameters".into()));
        }
        let mut seen = HashSet::new();
        for p in &params {
            p.check()?;
            if !seen.insert(p.name.as_str()) {
                return Err(Error::InvalidSpace(format!(
                    "duplicate parameter name `{}`",
                    p.name
                )));
            }
        }
        Ok(Self { params })
    }

    pub fn params(&self) -> &[ParamDef] {
        &self.params
    }

    pub fn get(&self, name: &str) -> Option<&ParamDef> {
        self.params.iter().find(|p| p.name == name)
    }

    /// Draws every dimension independently and uniformly.
    pub fn sample_config<R: Rng + ?Sized>(&self, rng: &mut R, id: u64) -> Config {
        let values = self
            .params
            .iter()
            .map(|p| (p.name.clone(), p.sample(rng)))
            .collect();
        Config { id, values }
    }

    /// Samples `n` configs with sequential ids starting at `first_id`.
    pub fn sample_configs<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        n: usize,
        first_id: u64,
    ) -> Vec<Config> {
        (0..n as u64)
            .map(|i| self.sample_config(rng, first_id + i))
            .collect()
    }

    pub fn validate_config(&self, cfg: &Config) -> bool {
        cfg.values.len() == self.params.len()
            && self
                .params
                .iter()
                .all(|p| cfg.values.get(&p.name).is_some_and(|v| p.contains(v)))
    }
}
