//! Sequential tests: Wald's SPRT and the sequential likelihood-ratio test for
//! the difference of two normal means with unknown, unequal variances.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    H0,
    H1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    Continue,
    AcceptH0,
    AcceptH1,
    /// No significant result by `n_max`; carries the hypothesis that won on
    /// point estimates.
    Forced(Hypothesis),
}

impl Decision {
    pub fn is_final(self) -> bool {
        self != Decision::Continue
    }

    /// The hypothesis the decision settles on, if any.
    pub fn outcome(self) -> Option<Hypothesis> {
        match self {
            Decision::Continue => None,
            Decision::AcceptH0 => Some(Hypothesis::H0),
            Decision::AcceptH1 => Some(Hypothesis::H1),
            Decision::Forced(h) => Some(h),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Decision::Continue => "continue",
            Decision::AcceptH0 => "accept_h0",
            Decision::AcceptH1 => "accept_h1",
            Decision::Forced(Hypothesis::H0) => "forced_h0",
            Decision::Forced(Hypothesis::H1) => "forced_h1",
        }
    }
}

/// Error-rate presets for the duel test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Setting {
    A,
    B,
    C,
    D,
}

impl Setting {
    pub const ALL: [Setting; 4] = [Setting::A, Setting::B, Setting::C, Setting::D];

    /// `(gamma1, alpha)`; `gamma0 = -gamma1`, `beta = alpha`.
    pub fn parameters(self) -> (f64, f64) {
        match self {
            Setting::A => (0.02, 0.05),
            Setting::B => (0.02, 0.01),
            Setting::C => (0.01, 0.05),
            Setting::D => (0.01, 0.01),
        }
    }

    pub fn config(self, n_max: usize) -> Result<SlrtConfig> {
        let (g, a) = self.parameters();
        SlrtConfig::new(-g, g, a, a, n_max)
    }

    pub fn label(self) -> &'static str {
        match self {
            Setting::A => "A",
            Setting::B => "B",
            Setting::C => "C",
            Setting::D => "D",
        }
    }
}

impl std::str::FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Setting::A),
            "B" | "b" => Ok(Setting::B),
            "C" | "c" => Ok(Setting::C),
            "D" | "d" => Ok(Setting::D),
            _ => Err(Error::InvalidArgument(format!("unknown setting `{s}`"))),
        }
    }
}

/// A named test configuration: a preset or explicit `γ0, γ1, α, β`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum SettingSpec {
    Preset(Setting),
    Explicit {
        label: String,
        gamma0: f64,
        gamma1: f64,
        alpha: f64,
        beta: f64,
    },
}

impl SettingSpec {
    pub fn label(&self) -> &str {
        match self {
            SettingSpec::Preset(s) => s.label(),
            SettingSpec::Explicit { label, .. } => label,
        }
    }

    pub fn config(&self, n_max: usize) -> Result<SlrtConfig> {
        match self {
            SettingSpec::Preset(s) => s.config(n_max),
            SettingSpec::Explicit {
                gamma0,
                gamma1,
                alpha,
                beta,
                ..
            } => SlrtConfig::new(*gamma0, *gamma1, *alpha, *beta, n_max),
        }
    }
}

impl From<Setting> for SettingSpec {
    fn from(s: Setting) -> Self {
        SettingSpec::Preset(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlrtConfig {
    pub gamma0: f64,
    pub gamma1: f64,
    pub alpha: f64,
    pub beta: f64,
    pub n_min: usize,
    pub n_max: usize,
}

impl SlrtConfig {
    pub fn new(gamma0: f64, gamma1: f64, alpha: f64, beta: f64, n_max: usize) -> Result<Self> {
        Self {
            gamma0,
            gamma1,
            alpha,
            beta,
            n_min: 2,
            n_max,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.gamma0.is_finite() && self.gamma1.is_finite() && self.gamma0 < self.gamma1) {
            return bad(format!(
                "need finite gamma0 < gamma1, got {} and {}",
                self.gamma0, self.gamma1
            ));
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v > 0.0 && v < 0.5) {
                return bad(format!("{name} must lie in (0, 0.5), got {v}"));
            }
        }
        if self.n_min < 2 || self.n_min > self.n_max {
            return bad(format!(
                "need 2 <= n_min <= n_max, got {} and {}",
                self.n_min, self.n_max
            ));
        }
        Ok(self)
    }

    fn log_ratio(&self) -> f64 {
        ((1.0 - self.alpha) / self.beta).ln()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Welford {
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64, n: usize) {
        let d = x - self.mean;
        self.mean += d / n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn variance(&self, n: usize) -> f64 {
        if n < 2 {
            0.0
        } else {
            (self.m2 / (n - 1) as f64).max(0.0)
        }
    }
}

/// Running statistics of the paired incumbent (`u`) and candidate (`w`)
/// streams; both always hold the same number of observations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SlrtState {
    n: usize,
    u: Welford,
    w: Welford,
}

impl SlrtState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mean_u(&self) -> f64 {
        self.u.mean
    }

    pub fn mean_w(&self) -> f64 {
        self.w.mean
    }

    pub fn var_u(&self) -> f64 {
        self.u.variance(self.n)
    }

    pub fn var_w(&self) -> f64 {
        self.w.variance(self.n)
    }

    /// `Z = n (ū - w̄ - (γ0 + γ1) / 2)`.
    pub fn statistic(&self, cfg: &SlrtConfig) -> f64 {
        self.n as f64 * (self.u.mean - self.w.mean - 0.5 * (cfg.gamma0 + cfg.gamma1))
    }
}

/// Half-width `A` of the continuation region `(-A, A)`.
pub fn slrt_bound(state: &SlrtState, cfg: &SlrtConfig) -> f64 {
    (state.var_u() + state.var_w()) / (cfg.gamma1 - cfg.gamma0) * cfg.log_ratio()
}

/// One step of the duel test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub n: usize,
    pub z: f64,
    pub bound: f64,
    pub decision: Decision,
}

/// Appends `u_n` and `w_n` and tests. `AcceptH1` means the candidate stream
/// `w` has the smaller mean.
pub fn slrt_step(state: &mut SlrtState, u_n: f64, w_n: f64, cfg: &SlrtConfig) -> Result<Step> {
    if !(u_n.is_finite() && w_n.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "non-finite observation ({u_n}, {w_n})"
        )));
    }
    if state.n >= cfg.n_max {
        return Err(Error::InvalidArgument(format!(
            "test already reached n_max = {}",
            cfg.n_max
        )));
    }
    state.n += 1;
    state.u.push(u_n, state.n);
    state.w.push(w_n, state.n);
    let n = state.n;
    let z = state.statistic(cfg);
    let bound = slrt_bound(state, cfg);

    let mut decision = if n < cfg.n_min {
        Decision::Continue
    } else if bound > 0.0 {
        if z >= bound {
            Decision::AcceptH1
        } else if z <= -bound {
            Decision::AcceptH0
        } else {
            Decision::Continue
        }
    } else if z > 0.0 {
        Decision::AcceptH1
    } else if z < 0.0 {
        Decision::AcceptH0
    } else {
        Decision::Continue
    };
    if decision == Decision::Continue && n == cfg.n_max {
        decision = Decision::Forced(if state.w.mean < state.u.mean {
            Hypothesis::H1
        } else {
            Hypothesis::H0
        });
    }
    Ok(Step {
        n,
        z,
        bound,
        decision,
    })
}

/// Runs the duel over paired observations until a decision; errors if the
/// streams run out first.
pub fn slrt_run(u: &[f64], w: &[f64], cfg: &SlrtConfig) -> Result<Vec<Step>> {
    if u.len() != w.len() {
        return Err(Error::LengthMismatch(u.len(), w.len()));
    }
    let mut state = SlrtState::new();
    let mut trace = Vec::new();
    for (&a, &b) in u.iter().zip(w) {
        let step = slrt_step(&mut state, a, b, cfg)?;
        trace.push(step);
        if step.decision.is_final() {
            return Ok(trace);
        }
    }
    Err(Error::InvalidArgument(format!(
        "streams exhausted after {} observations without a decision",
        u.len()
    )))
}

/// Maps a loss onto the scale the test runs on: `loss + c`, logged if asked.
pub fn transform_loss(loss: f64, c: f64, log: bool) -> Result<f64> {
    let x = loss + c;
    if !log {
        return Ok(x);
    }
    if x <= 0.0 {
        return Err(Error::Support {
            family: "log".into(),
            message: format!("shifted loss {x} is not positive; increase the shift"),
        });
    }
    Ok(x.ln())
}

/// CSV with columns `n,z,bound,decision`.
pub fn write_trace<W: Write>(trace: &[Step], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["n", "z", "bound", "decision"])?;
    for s in trace {
        w.write_record([
            s.n.to_string(),
            s.z.to_string(),
            s.bound.to_string(),
            s.decision.label().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SprtOutcome {
    pub decision: Decision,
    pub n: usize,
    pub log_ratio: f64,
}

/// Wald's SPRT on i.i.d. observations with thresholds
/// `a = ln((1-β)/α)` and `b = ln(β/(1-α))`. Consumes at most `n_max`
/// observations; the sign of the log ratio decides at `n_max`.
pub fn wald_sprt<I, F0, F1>(
    observations: I,
    logpdf0: F0,
    logpdf1: F1,
    alpha: f64,
    beta: f64,
    n_max: usize,
) -> Result<SprtOutcome>
where
    I: IntoIterator<Item = f64>,
    F0: Fn(f64) -> f64,
    F1: Fn(f64) -> f64,
{
    if !(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0) || n_max == 0 {
        return Err(Error::InvalidArgument(format!(
            "need alpha, beta in (0, 1) and n_max >= 1, got {alpha}, {beta}, {n_max}"
        )));
    }
    let a = ((1.0 - beta) / alpha).ln();
    let b = (beta / (1.0 - alpha)).ln();
    let mut z = 0.0;
    let mut n = 0;
    for x in observations.into_iter().take(n_max) {
        n += 1;
        let r = logpdf1(x) - logpdf0(x);
        if !r.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "non-finite log-likelihood ratio at observation {n}"
            )));
        }
        z += r;
        if z >= a {
            return Ok(SprtOutcome {
                decision: Decision::AcceptH1,
                n,
                log_ratio: z,
            });
        }
        if z <= b {
            return Ok(SprtOutcome {
                decision: Decision::AcceptH0,
                n,
                log_ratio: z,
            });
        }
    }
    if n < n_max {
        return Err(Error::InvalidArgument(format!(
            "observations exhausted after {n} of {n_max} without a decision"
        )));
    }
    let h = if z > 0.0 {
        Hypothesis::H1
    } else {
        Hypothesis::H0
    };
    Ok(SprtOutcome {
        decision: Decision::Forced(h),
        n,
        log_ratio: z,
    })
}
