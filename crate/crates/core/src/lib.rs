//! Hyperparameter tuning with sequential resampling.
//!
//! The crate provides a plain random search over a bootstrap resampling
//! instance and a sequential variant (SQRS) in which every new candidate
//! duels the incumbent through a sequential likelihood-ratio test for the
//! Behrens–Fisher problem. Resampling stops as soon as the test decides, so
//! clearly inferior candidates are discarded after a few model fits.
//!
//! Supporting modules cover search spaces, CSV datasets, two natively
//! implemented learners (elastic net and a CART-style tree), bootstrap
//! resampling with an evaluation cache, and a study of the distribution of
//! resampling errors (maximum-likelihood fits scored by the Cramér–von Mises
//! criterion).

pub mod data;
pub mod dist_fit;
mod error;
pub mod learners;
pub mod param_space;
pub mod resampling;
pub mod rng;
pub mod seqtest;
pub mod tuner;

pub use data::{Dataset, TaskKind};
pub use dist_fit::{DistFamily, FitResult};
pub use error::{Error, Result};
pub use learners::{LearnerKind, Model};
pub use param_space::{Config, ParamDef, ParamSpace, Value};
pub use resampling::{EvalCache, LossKind, Partition, ResamplingInstance};
pub use seqtest::{Decision, Hypothesis, Setting, SettingSpec, SlrtConfig, SlrtState};
pub use tuner::{PairedReport, RsResult, SqrsResult};
