//! Elastic net fitted by cyclic coordinate descent.
//!
//! Minimises
//!
//! ```text
//! loss(β0, β) + λ · (α‖β‖₁ + (1 − α)/2 · ‖β‖₂²)
//! ```
//!
//! where `loss` is `(1/2n)·Σ residual²` for regression and the mean logistic
//! negative log-likelihood for classification. Features are standardised
//! internally (categorical features one-hot encoded first), so the penalty
//! acts on standardised coefficients. Regression uses covariance updates;
//! logistic fits minimise the penalised IRLS quadratic approximation per
//! outer iteration and backtrack on the true objective.

use crate::data::{Column, Dataset, TaskKind};
use crate::error::{Error, Result};
use crate::param_space::Config;

use super::FeatureSchema;

const TOLERANCE: f64 = 1e-7;
const MAX_SWEEPS: usize = 10_000;
const PROB_CLAMP: f64 = 1e-12;
const MAX_HALVINGS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticNetParams {
    pub alpha: f64,
    pub lambda: f64,
}

impl ElasticNetParams {
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let params = Self {
            alpha: cfg.real("alpha")?,
            lambda: cfg.real("lambda")?,
        };
        if !(0.0..=1.0).contains(&params.alpha)
            || !(params.lambda > 0.0 && params.lambda.is_finite())
        {
            return Err(Error::InvalidConfig(format!(
                "elastic net needs alpha in [0, 1] and lambda > 0, got {params:?}"
            )));
        }
        Ok(params)
    }

    fn penalty(&self, beta: &[f64]) -> f64 {
        let (l1, l2) = beta
            .iter()
            .fold((0.0, 0.0), |(a, b), &x| (a + x.abs(), b + x * x));
        self.lambda * (self.alpha * l1 + 0.5 * (1.0 - self.alpha) * l2)
    }
}

#[derive(Debug, Clone)]
enum Source {
    Numeric(usize),
    Level(usize, String),
}

#[derive(Debug, Clone)]
struct DesignColumn {
    source: Source,
    mean: f64,
    sd: f64,
}

#[derive(Debug, Clone)]
pub struct ElasticNetModel {
    task: TaskKind,
    schema: FeatureSchema,
    columns: Vec<DesignColumn>,
    /// Coefficients on the standardised scale.
    beta: Vec<f64>,
    intercept: f64,
    sweeps: usize,
    converged: bool,
}

/// Objective value after each coordinate-descent sweep.
#[derive(Debug, Clone, Default)]
pub struct FitTrace {
    pub objective: Vec<f64>,
}

fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn raw_value(data: &Dataset, source: &Source, row: usize) -> f64 {
    match source {
        Source::Numeric(f) => match &data.features()[*f].column {
            Column::Numeric(v) => v[row],
            Column::Categorical { .. } => unreachable!("schema checked"),
        },
        Source::Level(f, level) => match &data.features()[*f].column {
            Column::Categorical { levels, codes } => {
                f64::from(u8::from(levels[codes[row] as usize] == *level))
            }
            Column::Numeric(_) => unreachable!("schema checked"),
        },
    }
}

struct Design {
    columns: Vec<DesignColumn>,
    /// Standardised values, column-major; one entry per training row.
    x: Vec<Vec<f64>>,
}

fn build_design(data: &Dataset, rows: &[usize]) -> Design {
    let n = rows.len() as f64;
    let mut columns = Vec::new();
    let mut x = Vec::new();
    let mut push = |source: Source| {
        let raw: Vec<f64> = rows.iter().map(|&r| raw_value(data, &source, r)).collect();
        let mean = raw.iter().sum::<f64>() / n;
        let var = raw.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        // constant columns carry no information and keep a zero coefficient
        if sd > 1e-12 * mean.abs().max(1.0) {
            x.push(raw.iter().map(|v| (v - mean) / sd).collect());
            columns.push(DesignColumn { source, mean, sd });
        }
    };
    for (f, feature) in data.features().iter().enumerate() {
        match &feature.column {
            Column::Numeric(_) => push(Source::Numeric(f)),
            Column::Categorical { levels, .. } => {
                for level in levels {
                    push(Source::Level(f, level.clone()));
                }
            }
        }
    }
    Design { columns, x }
}

impl ElasticNetModel {
    pub fn fit(params: &ElasticNetParams, data: &Dataset, rows: &[usize]) -> Result<Self> {
        Self::fit_traced(params, data, rows).map(|(m, _)| m)
    }

    pub fn fit_traced(
        params: &ElasticNetParams,
        data: &Dataset,
        rows: &[usize],
    ) -> Result<(Self, FitTrace)> {
        if rows.is_empty() {
            return Err(Error::InvalidDataset("cannot fit on zero rows".into()));
        }
        let design = build_design(data, rows);
        let y: Vec<f64> = rows.iter().map(|&r| data.target()[r]).collect();
        let mut trace = FitTrace::default();
        let (beta, intercept, sweeps, converged) = match data.task() {
            TaskKind::Regression => gaussian_cd(params, &design.x, &y, &mut trace),
            TaskKind::Classification => logistic_cd(params, &design.x, &y, &mut trace),
        };
        let model = Self {
            task: data.task(),
            schema: FeatureSchema::of(data),
            columns: design.columns,
            beta,
            intercept,
            sweeps,
            converged,
        };
        Ok((model, trace))
    }

    pub fn task(&self) -> TaskKind {
        self.task
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
            - self
                .beta
                .iter()
                .zip(&self.columns)
                .map(|(b, c)| b * c.mean / c.sd)
                .sum::<f64>()
    }

    /// Coefficients on the original feature scale, one per design column
    /// (numeric features, then one indicator per categorical level).
    /// Constant training columns are omitted.
    pub fn coefficients(&self) -> Vec<f64> {
        self.beta
            .iter()
            .zip(&self.columns)
            .map(|(b, c)| b / c.sd)
            .collect()
    }

    /// Slopes on the standardised scale, the quantity the penalty acts on.
    pub fn standardized_coefficients(&self) -> &[f64] {
        &self.beta
    }

    fn linear_predictor(&self, data: &Dataset, row: usize) -> f64 {
        self.intercept
            + self
                .columns
                .iter()
                .zip(&self.beta)
                .filter(|(_, b)| **b != 0.0)
                .map(|(c, b)| b * (raw_value(data, &c.source, row) - c.mean) / c.sd)
                .sum::<f64>()
    }

    pub fn predict(&self, data: &Dataset, rows: &[usize]) -> Result<Vec<f64>> {
        self.schema.check(data)?;
        Ok(rows
            .iter()
            .map(|&r| {
                let eta = self.linear_predictor(data, r);
                match self.task {
                    TaskKind::Regression => eta,
                    TaskKind::Classification => f64::from(u8::from(sigmoid(eta) > 0.5)),
                }
            })
            .collect())
    }

    /// Predicted probability of class 1 (classification only).
    pub fn predict_proba(&self, data: &Dataset, rows: &[usize]) -> Result<Vec<f64>> {
        self.schema.check(data)?;
        if self.task != TaskKind::Classification {
            return Err(Error::InvalidArgument(
                "probabilities need a classification model".into(),
            ));
        }
        Ok(rows
            .iter()
            .map(|&r| sigmoid(self.linear_predictor(data, r)))
            .collect())
    }
}

fn converged(max_delta: f64, beta: &[f64], intercept_scale: f64) -> bool {
    let scale = beta.iter().fold(intercept_scale, |m, b| m.max(b.abs()));
    max_delta <= TOLERANCE * scale.max(f64::MIN_POSITIVE)
}

/// Covariance-update coordinate descent: the Gram matrix `XᵀX/n` is formed
/// once, so a sweep costs `O(p²)` regardless of the number of rows.
fn gaussian_cd(
    params: &ElasticNetParams,
    x: &[Vec<f64>],
    y: &[f64],
    trace: &mut FitTrace,
) -> (Vec<f64>, f64, usize, bool) {
    let n = y.len() as f64;
    let p = x.len();
    let y_mean = y.iter().sum::<f64>() / n;
    let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>() / n;
    let yy = dot(&yc, &yc);
    let xy: Vec<f64> = x.iter().map(|xj| dot(xj, &yc)).collect();
    let mut gram = vec![0.0; p * p];
    for j in 0..p {
        for k in j..p {
            let g = dot(&x[j], &x[k]);
            gram[j * p + k] = g;
            gram[k * p + j] = g;
        }
    }
    // q = Gram · beta
    let mut q = vec![0.0; p];
    let mut beta = vec![0.0; p];
    let l1 = params.lambda * params.alpha;
    let l2 = params.lambda * (1.0 - params.alpha);
    let objective = |beta: &[f64], q: &[f64]| {
        let fit: f64 = beta
            .iter()
            .zip(xy.iter().zip(q))
            .map(|(b, (c, g))| b * (0.5 * g - c))
            .sum();
        (0.5 * yy + fit).max(0.0) + params.penalty(beta)
    };
    let mut last = objective(&beta, &q);

    for sweep in 1..=MAX_SWEEPS {
        let mut max_delta: f64 = 0.0;
        for j in 0..p {
            let gjj = gram[j * p + j];
            let z = xy[j] - q[j] + gjj * beta[j];
            let updated = soft_threshold(z, l1) / (gjj + l2);
            let delta = updated - beta[j];
            if delta != 0.0 {
                q.iter_mut()
                    .zip(&gram[j * p..(j + 1) * p])
                    .for_each(|(qk, g)| *qk += delta * g);
                beta[j] = updated;
                max_delta = max_delta.max(delta.abs());
            }
        }
        let obj = objective(&beta, &q);
        debug_assert!(
            obj <= last + 1e-10 * yy.max(last).max(1e-300),
            "elastic net objective increased: {last} -> {obj}"
        );
        trace.objective.push(obj);
        last = obj;
        if converged(max_delta, &beta, 0.0) {
            return (beta, y_mean, sweep, true);
        }
    }
    (beta, y_mean, MAX_SWEEPS, false)
}

fn logistic_objective(
    params: &ElasticNetParams,
    x: &[Vec<f64>],
    y: &[f64],
    b0: f64,
    beta: &[f64],
) -> f64 {
    let n = y.len();
    let mut eta = vec![b0; n];
    for (xj, bj) in x.iter().zip(beta) {
        if *bj != 0.0 {
            eta.iter_mut().zip(xj).for_each(|(e, xi)| *e += bj * xi);
        }
    }
    let nll = eta
        .iter()
        .zip(y)
        .map(|(e, yi)| softplus(*e) - yi * e)
        .sum::<f64>()
        / n as f64;
    nll + params.penalty(beta)
}

/// Proximal Newton: each outer iteration minimises the penalised IRLS
/// quadratic approximation by coordinate descent on a weighted Gram matrix,
/// then backtracks on the true objective.
fn logistic_cd(
    params: &ElasticNetParams,
    x: &[Vec<f64>],
    y: &[f64],
    trace: &mut FitTrace,
) -> (Vec<f64>, f64, usize, bool) {
    let n = y.len() as f64;
    let p = x.len();
    let mean_y = (y.iter().sum::<f64>() / n).clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    let mut b0 = (mean_y / (1.0 - mean_y)).ln();
    let mut beta = vec![0.0; p];
    let l1 = params.lambda * params.alpha;
    let l2 = params.lambda * (1.0 - params.alpha);
    let mut last = logistic_objective(params, x, y, b0, &beta);
    // coordinate p is the intercept
    let m = p + 1;
    let col = |j: usize| -> &[f64] {
        if j == p {
            &[]
        } else {
            &x[j]
        }
    };

    for sweep in 1..=MAX_SWEEPS {
        let mut eta = vec![b0; y.len()];
        for (xj, bj) in x.iter().zip(&beta) {
            if *bj != 0.0 {
                eta.iter_mut().zip(xj).for_each(|(e, xi)| *e += bj * xi);
            }
        }
        let mut w = Vec::with_capacity(y.len());
        let mut g = Vec::with_capacity(y.len());
        for (e, yi) in eta.iter().zip(y) {
            let pr = sigmoid(*e).clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
            w.push(pr * (1.0 - pr));
            g.push(yi - pr);
        }
        let mut h = vec![0.0; m * m];
        let mut grad = vec![0.0; m];
        for j in 0..m {
            let xj = col(j);
            grad[j] = if j == p {
                g.iter().sum::<f64>() / n
            } else {
                xj.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>() / n
            };
            for k in j..m {
                let xk = col(k);
                let v = match (j == p, k == p) {
                    (true, _) => w.iter().sum::<f64>(),
                    (false, true) => xj.iter().zip(&w).map(|(a, b)| a * b).sum(),
                    (false, false) => xj.iter().zip(xk).zip(&w).map(|((a, b), c)| a * b * c).sum(),
                } / n;
                h[j * m + k] = v;
                h[k * m + j] = v;
            }
        }
        // coordinate descent on the step d: min -grad·d + d'Hd/2 + penalty(beta + d)
        let mut d = vec![0.0; m];
        let mut hd = vec![0.0; m];
        for _ in 0..MAX_SWEEPS {
            let mut max_delta: f64 = 0.0;
            for j in 0..m {
                let hjj = h[j * m + j];
                if hjj <= 0.0 {
                    continue;
                }
                let updated = if j == p {
                    d[j] + (grad[j] - hd[j]) / hjj
                } else {
                    let z = grad[j] - hd[j] + hjj * (beta[j] + d[j]);
                    soft_threshold(z, l1) / (hjj + l2) - beta[j]
                };
                let delta = updated - d[j];
                if delta != 0.0 {
                    hd.iter_mut()
                        .zip(&h[j * m..(j + 1) * m])
                        .for_each(|(a, hk)| *a += delta * hk);
                    d[j] = updated;
                    max_delta = max_delta.max(delta.abs());
                }
            }
            let scale = beta
                .iter()
                .zip(&d)
                .fold(1.0f64, |s, (b, dj)| s.max((b + dj).abs()));
            if max_delta <= 1e-2 * TOLERANCE * scale {
                break;
            }
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let cand_b0 = b0 + step * d[p];
            let cand: Vec<f64> = beta.iter().zip(&d).map(|(b, dj)| b + step * dj).collect();
            let obj = logistic_objective(params, x, y, cand_b0, &cand);
            if obj <= last {
                accepted = Some((cand_b0, cand, obj));
                break;
            }
            step *= 0.5;
        }
        let Some((cand_b0, cand, obj)) = accepted else {
            trace.objective.push(last);
            return (beta, b0, sweep, true);
        };
        let max_delta = cand
            .iter()
            .zip(&beta)
            .map(|(a, b)| (a - b).abs())
            .fold((cand_b0 - b0).abs(), f64::max);
        debug_assert!(obj <= last, "logistic objective increased: {last} -> {obj}");
        b0 = cand_b0;
        beta = cand;
        last = obj;
        trace.objective.push(obj);
        if converged(max_delta, &beta, b0.abs()) {
            return (beta, b0, sweep, true);
        }
    }
    (beta, b0, MAX_SWEEPS, false)
}
