//! Maximum-likelihood fits of candidate families to resampling losses,
//! scored by the Cramér–von Mises criterion
//! `T = 1/(12n) + Σ ((2i-1)/(2n) - F(x_(i)))²`.
//!
//! Every fit works on shifted data `y = x + c`. Log- and inverse-families are
//! reported on the scale of `y` (densities include the Jacobian), so their
//! log-likelihoods are comparable with the plain families.

mod nelder_mead;
mod study;

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};
use statrs::function::beta::{beta_reg, ln_beta};
use statrs::function::erf::erfc;
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::data::TaskKind;
use crate::error::{Error, Result};

pub use study::{dist_study, DistStudy, FamilySummary, StudyFailure, StudyRow};

/// Shifts tried by [`shift_search`]; `0` is used only where admissible.
pub const SHIFTS: [f64; 9] = [0.0, 0.001, 0.01, 0.1, 0.15, 0.25, 0.5, 1.0, 1.5];

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistFamily {
    /// `(mean, sd)`
    Normal,
    /// `(meanlog, sdlog)`
    Lognormal,
    /// `(shape, rate)`
    Gamma,
    /// `(shape, rate)` of `ln y`; support `y > 1`
    Loggamma,
    /// `(shape, scale)`; `1/y` is gamma with rate = scale
    Invgamma,
    /// `(shape, scale)`
    Weibull,
    /// `(shape, scale)` with `F(y) = exp(-(scale/y)^shape)`
    Invweibull,
    /// `(shape1, shape2)`; support `0 < y < 1`
    Beta,
}

impl DistFamily {
    pub const ALL: [DistFamily; 8] = [
        DistFamily::Normal,
        DistFamily::Lognormal,
        DistFamily::Gamma,
        DistFamily::Loggamma,
        DistFamily::Invgamma,
        DistFamily::Weibull,
        DistFamily::Invweibull,
        DistFamily::Beta,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DistFamily::Normal => "normal",
            DistFamily::Lognormal => "lognormal",
            DistFamily::Gamma => "gamma",
            DistFamily::Loggamma => "loggamma",
            DistFamily::Invgamma => "invgamma",
            DistFamily::Weibull => "weibull",
            DistFamily::Invweibull => "invweibull",
            DistFamily::Beta => "beta",
        }
    }

    pub fn param_names(self) -> [&'static str; 2] {
        match self {
            DistFamily::Normal => ["mean", "sd"],
            DistFamily::Lognormal => ["meanlog", "sdlog"],
            DistFamily::Gamma | DistFamily::Loggamma => ["shape", "rate"],
            DistFamily::Invgamma | DistFamily::Weibull | DistFamily::Invweibull => {
                ["shape", "scale"]
            }
            DistFamily::Beta => ["shape1", "shape2"],
        }
    }

    /// Families studied for a task; beta only makes sense for error rates.
    pub fn for_task(task: TaskKind) -> Vec<DistFamily> {
        Self::ALL
            .into_iter()
            .filter(|f| *f != DistFamily::Beta || task == TaskKind::Classification)
            .collect()
    }

    fn in_support(self, y: f64) -> bool {
        match self {
            DistFamily::Normal => y.is_finite(),
            DistFamily::Loggamma => y > 1.0 && y.is_finite(),
            DistFamily::Beta => y > 0.0 && y < 1.0,
            _ => y > 0.0 && y.is_finite(),
        }
    }

    /// Whether every `x + c` lies in the support.
    pub fn admissible(self, samples: &[f64], c: f64) -> bool {
        samples.iter().all(|&x| self.in_support(x + c))
    }

    /// Log-density at `y` (already shifted).
    fn logpdf(self, p: [f64; 2], y: f64) -> f64 {
        let [a, b] = p;
        match self {
            DistFamily::Normal => -LN_SQRT_2PI - b.ln() - 0.5 * ((y - a) / b).powi(2),
            DistFamily::Lognormal => {
                let z = y.ln();
                -LN_SQRT_2PI - b.ln() - 0.5 * ((z - a) / b).powi(2) - z
            }
            DistFamily::Gamma => a * b.ln() - ln_gamma(a) + (a - 1.0) * y.ln() - b * y,
            DistFamily::Loggamma => {
                let z = y.ln();
                a * b.ln() - ln_gamma(a) + (a - 1.0) * z.ln() - b * z - z
            }
            DistFamily::Invgamma => a * b.ln() - ln_gamma(a) - (a + 1.0) * y.ln() - b / y,
            DistFamily::Weibull => a.ln() - b.ln() + (a - 1.0) * (y / b).ln() - (y / b).powf(a),
            DistFamily::Invweibull => a.ln() + a * b.ln() - (a + 1.0) * y.ln() - (b / y).powf(a),
            DistFamily::Beta => (a - 1.0) * y.ln() + (b - 1.0) * (-y).ln_1p() - ln_beta(a, b),
        }
    }

    /// Distribution function at `y` (already shifted).
    fn cdf(self, p: [f64; 2], y: f64) -> f64 {
        let [a, b] = p;
        match self {
            DistFamily::Normal => 0.5 * erfc(-(y - a) / (b * SQRT_2)),
            DistFamily::Lognormal => 0.5 * erfc(-(y.ln() - a) / (b * SQRT_2)),
            DistFamily::Gamma => gamma_lr(a, b * y),
            DistFamily::Loggamma => gamma_lr(a, b * y.ln()),
            DistFamily::Invgamma => gamma_ur(a, b / y),
            DistFamily::Weibull => -(-(y / b).powf(a)).exp_m1(),
            DistFamily::Invweibull => (-(b / y).powf(a)).exp(),
            DistFamily::Beta => beta_reg(a, b, y),
        }
    }
}

impl std::fmt::Display for DistFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for DistFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown distribution family `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub family: DistFamily,
    /// Family-specific, ordered as in [`DistFamily::param_names`].
    pub params: [f64; 2],
    pub shift: f64,
    pub loglik: f64,
    pub cvm: f64,
    pub n: usize,
}

impl FitResult {
    /// Fitted distribution function at an unshifted sample value.
    pub fn cdf(&self, x: f64) -> f64 {
        self.family.cdf(self.params, x + self.shift)
    }
}

fn check_support(samples: &[f64], family: DistFamily, c: f64) -> Result<Vec<f64>> {
    if samples.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 samples, got {}",
            samples.len()
        )));
    }
    let ys: Vec<f64> = samples.iter().map(|x| x + c).collect();
    if let Some(bad) = ys.iter().find(|&&y| !family.in_support(y)) {
        return Err(Error::Support {
            family: family.to_string(),
            message: format!("shifted value {bad} (shift {c}) outside the support"),
        });
    }
    Ok(ys)
}

fn mean_var(z: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = z.clone().count() as f64;
    let mean = z.clone().sum::<f64>() / n;
    let var = z.map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}

fn degenerate(family: DistFamily) -> Error {
    Error::Support {
        family: family.to_string(),
        message: "sample has zero variance".into(),
    }
}

/// Moment-based gamma `(shape, rate)` for values `z`.
fn gamma_moments(z: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let (m, v) = mean_var(z);
    (m * m / v, m / v)
}

/// Weibull `(shape, scale)` from the mean and variance of `ln z`.
fn weibull_moments(z: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let (m, v) = mean_var(z.map(f64::ln));
    let k = PI / (v.sqrt() * 6f64.sqrt());
    (k, (m + EULER_GAMMA / k).exp())
}

/// Moment-based starting parameters (for normal and lognormal these are the
/// closed-form estimates).
pub fn moment_start(samples: &[f64], family: DistFamily, c: f64) -> Result<[f64; 2]> {
    let ys = check_support(samples, family, c)?;
    if ys.iter().all(|&v| v == ys[0]) {
        return Err(degenerate(family));
    }
    let y = ys.iter().copied();
    let p = match family {
        DistFamily::Normal => {
            let (m, v) = mean_var(y);
            [m, v.sqrt()]
        }
        DistFamily::Lognormal => {
            let (m, v) = mean_var(y.map(f64::ln));
            [m, v.sqrt()]
        }
        DistFamily::Gamma => {
            let (k, r) = gamma_moments(y);
            [k, r]
        }
        DistFamily::Loggamma => {
            let (k, r) = gamma_moments(y.map(f64::ln));
            [k, r]
        }
        DistFamily::Invgamma => {
            let (k, r) = gamma_moments(y.map(f64::recip));
            [k, r]
        }
        DistFamily::Weibull => {
            let (k, s) = weibull_moments(y);
            [k, s]
        }
        DistFamily::Invweibull => {
            let (k, s) = weibull_moments(y.map(f64::recip));
            [k, 1.0 / s]
        }
        DistFamily::Beta => {
            let (m, v) = mean_var(y);
            let common = m * (1.0 - m) / v - 1.0;
            if common > 0.0 {
                [m * common, (1.0 - m) * common]
            } else {
                [1.0, 1.0]
            }
        }
    };
    let location = matches!(family, DistFamily::Normal | DistFamily::Lognormal);
    if !(p[0].is_finite() && p[1].is_finite() && p[1] > 0.0 && (location || p[0] > 0.0)) {
        return Err(degenerate(family));
    }
    Ok(p)
}

/// Log-likelihood of unshifted `samples` at `params`, on the scale of `x + c`.
pub fn log_likelihood(samples: &[f64], family: DistFamily, c: f64, params: [f64; 2]) -> f64 {
    samples.iter().map(|x| family.logpdf(params, x + c)).sum()
}

/// Unconstrained coordinates used by the optimiser. Gamma-type families use
/// `(ln shape, ln mean)`, which decorrelates the two directions.
fn to_theta(family: DistFamily, p: [f64; 2]) -> [f64; 2] {
    match family {
        DistFamily::Gamma | DistFamily::Loggamma | DistFamily::Invgamma => {
            [p[0].ln(), (p[0] / p[1]).ln()]
        }
        _ => [p[0].ln(), p[1].ln()],
    }
}

fn from_theta(family: DistFamily, t: &[f64]) -> [f64; 2] {
    match family {
        DistFamily::Gamma | DistFamily::Loggamma | DistFamily::Invgamma => {
            let k = t[0].exp();
            [k, k / t[1].exp()]
        }
        _ => [t[0].exp(), t[1].exp()],
    }
}

/// Maximum-likelihood fit of `family` to `samples + c`.
pub fn fit_mle(samples: &[f64], family: DistFamily, c: f64) -> Result<FitResult> {
    let start = moment_start(samples, family, c)?;
    let params = match family {
        DistFamily::Normal | DistFamily::Lognormal => start,
        _ => {
            let objective = |t: &[f64]| -log_likelihood(samples, family, c, from_theta(family, t));
            let min = nelder_mead::minimize(objective, &to_theta(family, start))?;
            from_theta(family, &min.x)
        }
    };
    let loglik = log_likelihood(samples, family, c, params);
    let cvm = cvm_criterion(samples, |x| family.cdf(params, x + c));
    Ok(FitResult {
        family,
        params,
        shift: c,
        loglik,
        cvm,
        n: samples.len(),
    })
}

/// `T = 1/(12n) + Σ ((2i-1)/(2n) - F(x_(i)))²` over the sorted sample.
pub fn cvm_criterion<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let sum: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| ((2 * i + 1) as f64 / (2.0 * n) - cdf(x)).powi(2))
        .sum();
    1.0 / (12.0 * n) + sum
}

/// Fits at every admissible shift in [`SHIFTS`] and keeps the smallest
/// criterion (the first shift on ties). Shifts whose fit does not converge
/// are skipped; if none succeeds the last error is returned.
pub fn shift_search(samples: &[f64], family: DistFamily) -> Result<FitResult> {
    let mut best: Option<FitResult> = None;
    let mut last_err = None;
    for c in SHIFTS {
        if !family.admissible(samples, c) {
            continue;
        }
        match fit_mle(samples, family, c) {
            Ok(fit) => {
                if best.as_ref().is_none_or(|b| fit.cvm < b.cvm) {
                    best = Some(fit);
                }
            }
            Err(e @ Error::NonConvergence { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap_or_else(|| Error::NoAdmissibleShift(family.to_string())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::{Distribution, Exp, Gamma, LogNormal, Normal, Weibull};

    fn draws<D: Distribution<f64>>(d: D, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = stream(seed, "draws", 0);
        (0..n).map(|_| d.sample(&mut rng)).collect()
    }

    #[test]
    fn lognormal_closed_form_example() {
        let e2 = 2f64.exp();
        let fit = fit_mle(&[1.0, e2, 1.0, e2], DistFamily::Lognormal, 0.0).unwrap();
        assert!((fit.params[0] - 1.0).abs() < 1e-12);
        assert!((fit.params[1].powi(2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normal_closed_form_against_hand_values() {
        let xs = [2.0, 4.0, 4.0, 5.0, 10.0];
        let fit = fit_mle(&xs, DistFamily::Normal, 0.0).unwrap();
        assert!((fit.params[0] - 5.0).abs() < 1e-12);
        // squared deviations 9 + 1 + 1 + 0 + 25 = 36
        assert!((fit.params[1].powi(2) - 36.0 / 5.0).abs() < 1e-12);
        let ll = -5.0 * (2.0 * PI * 7.2).ln() / 2.0 - 36.0 / (2.0 * 7.2);
        assert!((fit.loglik - ll).abs() < 1e-10);
    }

    #[test]
    fn constant_sample_is_a_support_violation() {
        for fam in DistFamily::ALL {
            let c = if fam == DistFamily::Loggamma {
                1.5
            } else {
                0.0
            };
            assert!(
                matches!(fit_mle(&[0.4; 6], fam, c), Err(Error::Support { .. })),
                "{fam}"
            );
        }
    }

    #[test]
    fn support_violations() {
        assert!(fit_mle(&[0.0, 1.0, 2.0], DistFamily::Lognormal, 0.0).is_err());
        assert!(fit_mle(&[0.5, 0.7, 0.9], DistFamily::Loggamma, 0.2).is_err());
        assert!(fit_mle(&[0.1, 0.5, 0.9], DistFamily::Beta, 0.1).is_err());
        assert!(fit_mle(&[0.1, 0.5], DistFamily::Normal, 0.0).is_err());
    }

    #[test]
    fn gamma_recovers_exponential_shape() {
        let xs = draws(Exp::new(1.0).unwrap(), 5000, 3);
        let fit = fit_mle(&xs, DistFamily::Gamma, 0.0).unwrap();
        assert!((fit.params[0] - 1.0).abs() < 0.05, "{:?}", fit.params);
    }

    #[test]
    fn gamma_mle_satisfies_score_equations() {
        // profile equations: rate = shape / mean, ln shape - digamma(shape) = ln mean - mean ln
        let xs = draws(Gamma::new(3.0, 0.5).unwrap(), 2000, 4);
        let fit = fit_mle(&xs, DistFamily::Gamma, 0.0).unwrap();
        let [k, r] = fit.params;
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let ml = xs.iter().map(|x| x.ln()).sum::<f64>() / n;
        assert!((r - k / m).abs() < 1e-6 * r);
        let lhs = k.ln() - statrs::function::gamma::digamma(k);
        assert!((lhs - (m.ln() - ml)).abs() < 1e-6);
    }

    #[test]
    fn weibull_recovers_parameters() {
        let xs = draws(Weibull::new(2.0, 1.5).unwrap(), 5000, 5);
        let fit = fit_mle(&xs, DistFamily::Weibull, 0.0).unwrap();
        // rand_distr's Weibull::new takes (scale, shape)
        assert!((fit.params[0] - 1.5).abs() < 0.06, "{:?}", fit.params);
        assert!((fit.params[1] - 2.0).abs() < 0.06, "{:?}", fit.params);
    }

    #[test]
    fn inverse_families_match_base_fit_on_reciprocals() {
        let xs = draws(LogNormal::new(0.0, 0.4).unwrap(), 500, 6);
        let inv: Vec<f64> = xs.iter().map(|x| 1.0 / x).collect();
        let ig = fit_mle(&xs, DistFamily::Invgamma, 0.0).unwrap();
        let g = fit_mle(&inv, DistFamily::Gamma, 0.0).unwrap();
        assert!((ig.params[0] - g.params[0]).abs() < 1e-5 * g.params[0]);
        assert!((ig.params[1] - g.params[1]).abs() < 1e-5 * g.params[1]);
        let jac: f64 = xs.iter().map(|x| x.ln()).sum::<f64>();
        assert!((ig.loglik - (g.loglik - 2.0 * jac)).abs() < 1e-6 * jac.abs().max(1.0));
        // F_inv(x) = 1 - F_base(1/x)
        assert!((ig.cdf(1.3) - (1.0 - g.cdf(1.0 / 1.3))).abs() < 1e-5);

        let iw = fit_mle(&xs, DistFamily::Invweibull, 0.0).unwrap();
        let w = fit_mle(&inv, DistFamily::Weibull, 0.0).unwrap();
        assert!((iw.params[0] - w.params[0]).abs() < 1e-5 * w.params[0]);
        assert!((iw.params[1] * w.params[1] - 1.0).abs() < 1e-5);
        assert!((iw.cdf(0.8) - (1.0 - w.cdf(1.0 / 0.8))).abs() < 1e-5);
    }

    #[test]
    fn loggamma_is_gamma_on_logs() {
        let xs: Vec<f64> = draws(Gamma::new(4.0, 0.25).unwrap(), 400, 7)
            .into_iter()
            .map(f64::exp)
            .collect();
        let lg = fit_mle(&xs, DistFamily::Loggamma, 0.0).unwrap();
        let logs: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
        let g = fit_mle(&logs, DistFamily::Gamma, 0.0).unwrap();
        assert!((lg.params[0] - g.params[0]).abs() < 1e-5 * g.params[0]);
        assert!((lg.cvm - g.cvm).abs() < 1e-9);
    }

    #[test]
    fn beta_fit_on_unit_interval() {
        let d = rand_distr::Beta::new(2.0, 5.0).unwrap();
        let xs = draws(d, 3000, 8);
        let fit = fit_mle(&xs, DistFamily::Beta, 0.0).unwrap();
        assert!((fit.params[0] - 2.0).abs() < 0.15 && (fit.params[1] - 5.0).abs() < 0.4);
    }

    #[test]
    fn density_integrates_to_cdf() {
        // trapezoid integral of exp(logpdf) between two points equals the cdf difference
        let cases = [
            (DistFamily::Normal, [0.3, 1.2], 0.0, 1.0),
            (DistFamily::Lognormal, [0.1, 0.5], 0.5, 2.0),
            (DistFamily::Gamma, [2.5, 1.5], 0.5, 3.0),
            (DistFamily::Loggamma, [3.0, 4.0], 1.5, 3.0),
            (DistFamily::Invgamma, [3.0, 2.0], 0.4, 2.0),
            (DistFamily::Weibull, [1.7, 1.1], 0.2, 2.0),
            (DistFamily::Invweibull, [2.2, 0.9], 0.5, 3.0),
            (DistFamily::Beta, [2.0, 3.0], 0.1, 0.8),
        ];
        for (fam, p, lo, hi) in cases {
            let m = 20_000;
            let h = (hi - lo) / m as f64;
            let f = |y: f64| fam.logpdf(p, y).exp();
            let integral =
                h * ((1..m).map(|i| f(lo + i as f64 * h)).sum::<f64>() + 0.5 * (f(lo) + f(hi)));
            let diff = fam.cdf(p, hi) - fam.cdf(p, lo);
            assert!(
                (integral - diff).abs() < 1e-6,
                "{fam}: {integral} vs {diff}"
            );
        }
    }

    #[test]
    fn cvm_identities() {
        assert!((cvm_criterion(&[3.0], |_| 0.5) - 1.0 / 12.0).abs() < 1e-15);
        let n = 7;
        let xs: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let perfect = |x: f64| (2.0 * x + 1.0) / (2.0 * n as f64);
        assert!((cvm_criterion(&xs, perfect) - 1.0 / (12.0 * n as f64)).abs() < 1e-15);
        // unsorted input is sorted first
        let rev: Vec<f64> = xs.iter().rev().copied().collect();
        assert_eq!(cvm_criterion(&rev, perfect), cvm_criterion(&xs, perfect));
    }

    #[test]
    fn normal_fit_to_normal_draws_is_good() {
        let xs = draws(Normal::new(0.0, 1.0).unwrap(), 1000, 9);
        let fit = fit_mle(&xs, DistFamily::Normal, 0.0).unwrap();
        assert!(fit.cvm < 0.5, "{}", fit.cvm);
    }

    #[test]
    fn shift_search_skips_inadmissible_shifts() {
        let xs = [0.0, 0.1, 0.2, 0.1, 0.3, 0.05];
        let fit = shift_search(&xs, DistFamily::Lognormal).unwrap();
        assert!(fit.shift > 0.0);
        let beta = shift_search(&xs, DistFamily::Beta).unwrap();
        assert!(beta.shift + 0.3 < 1.0);
        for c in SHIFTS
            .into_iter()
            .filter(|&c| DistFamily::Beta.admissible(&xs, c))
        {
            assert!(beta.cvm <= fit_mle(&xs, DistFamily::Beta, c).unwrap().cvm);
        }
        assert!(matches!(
            shift_search(&[2.0, 3.0, 4.0], DistFamily::Beta),
            Err(Error::NoAdmissibleShift(_))
        ));
    }

    #[test]
    fn shift_search_returns_argmin() {
        let xs = draws(LogNormal::new(1.0, 0.3).unwrap(), 200, 10);
        for fam in DistFamily::for_task(TaskKind::Regression) {
            let best = shift_search(&xs, fam).unwrap();
            for c in SHIFTS.into_iter().filter(|&c| fam.admissible(&xs, c)) {
                let other = fit_mle(&xs, fam, c).unwrap();
                assert!(best.cvm <= other.cvm, "{fam} c={c}");
            }
        }
    }

    #[test]
    fn family_names_round_trip() {
        for fam in DistFamily::ALL {
            assert_eq!(fam.as_str().parse::<DistFamily>().unwrap(), fam);
        }
        assert!(!DistFamily::for_task(TaskKind::Regression).contains(&DistFamily::Beta));
    }

    proptest! {
        #[test]
        fn fit_never_worse_than_moment_start(seed in any::<u64>(), fam_idx in 0usize..8) {
            let fam = DistFamily::ALL[fam_idx];
            let mut rng = stream(seed, "prop", 0);
            let xs: Vec<f64> = (0..40).map(|_| 0.05 + 0.9 * rng.random::<f64>()).collect();
            let c = if fam == DistFamily::Loggamma { 1.0 } else { 0.0 };
            let start = moment_start(&xs, fam, c).unwrap();
            let fit = fit_mle(&xs, fam, c).unwrap();
            prop_assert!(fit.loglik >= log_likelihood(&xs, fam, c, start) - 1e-9);
            prop_assert!(fit.cvm >= 1.0 / (12.0 * 40.0));
        }

        #[test]
        fn cvm_is_invariant_under_affine_maps(seed in any::<u64>(), a in 0.1f64..10.0, b in -5.0f64..5.0) {
            let mut rng = stream(seed, "affine", 0);
            let xs: Vec<f64> = (0..30).map(|_| rng.random::<f64>() * 3.0).collect();
            let cdf = |x: f64| 1.0 - (-x).exp();
            let ys: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
            let t1 = cvm_criterion(&xs, cdf);
            let t2 = cvm_criterion(&ys, |y| cdf((y - b) / a));
            prop_assert!((t1 - t2).abs() < 1e-9);
            prop_assert!(t1 >= 1.0 / 360.0);
        }
    }
}
