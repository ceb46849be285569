//! Acceptance gate: one PASS/FAIL line per criterion. Exits non-zero if any
//! criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};

use seqtune_core::data::CsvSchema;
use seqtune_core::dist_fit::{dist_study, fit_mle};
use seqtune_core::resampling::{loss, make_bootstrap_instance};
use seqtune_core::rng::stream;
use seqtune_core::seqtest::slrt_step;
use seqtune_core::tuner::{aggregate, paired_compare, random_search, PairedReport, PairedSpec};
use seqtune_core::{
    Dataset, DistFamily, EvalCache, Hypothesis, LearnerKind, LossKind, ResamplingInstance, Setting,
    SlrtState, TaskKind,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn load(file: &str, target: &str, task: TaskKind) -> Dataset {
    Dataset::load_csv(fixtures().join(file), &CsvSchema::new(target, task)).expect("fixture loads")
}

fn within_budget(elapsed: Duration, limit_secs: u64, detail: &mut String) -> bool {
    let ok = elapsed.as_secs_f64() < limit_secs as f64;
    detail.push_str(&format!(
        "; {:.1}s (limit {limit_secs}s)",
        elapsed.as_secs_f64()
    ));
    ok
}

/// Type-I / type-II rates of the duel test on normal logged-loss streams.
fn criterion_1() -> Outcome {
    const DUELS: usize = 2000;
    const N_MAX: usize = 500;
    const SIGMA: f64 = 0.05;
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for setting in Setting::ALL {
        let cfg = setting.config(N_MAX).unwrap();
        let mut rates = [0.0; 2];
        for (h, truth) in [(0usize, cfg.gamma0), (1, cfg.gamma1)] {
            let mut rng = stream(1, &format!("slrt-{}-{h}", setting.label()), 0);
            let noise = Normal::new(0.0, SIGMA).unwrap();
            let mut errors = 0;
            for _ in 0..DUELS {
                let mut state = SlrtState::new();
                let outcome = loop {
                    let w = 0.5 + noise.sample(&mut rng);
                    let u = 0.5 + truth + noise.sample(&mut rng);
                    let step = slrt_step(&mut state, u, w, &cfg).unwrap();
                    if let Some(o) = step.decision.outcome() {
                        break o;
                    }
                };
                let wrong = if h == 0 {
                    Hypothesis::H1
                } else {
                    Hypothesis::H0
                };
                if outcome == wrong {
                    errors += 1;
                }
            }
            rates[h] = errors as f64 / DUELS as f64;
        }
        let tol = |p: f64| p + 2.0 * (p * (1.0 - p) / DUELS as f64).sqrt();
        let ok = rates[0] <= tol(cfg.alpha) && rates[1] <= tol(cfg.beta);
        pass &= ok;
        parts.push(format!(
            "{}: I={:.4} (<= {:.4}) II={:.4} (<= {:.4})",
            setting.label(),
            rates[0],
            tol(cfg.alpha),
            rates[1],
            tol(cfg.beta)
        ));
    }
    let mut detail = format!(
        "sigma={SIGMA}, {DUELS} duels, n_max={N_MAX}; {}",
        parts.join(", ")
    );
    pass &= within_budget(start.elapsed(), 60, &mut detail);
    Outcome { pass, detail }
}

/// CvM of a normal fit to normal, uniform and exponential samples.
fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut normal_ok = 0;
    let mut uniform = (f64::INFINITY, f64::NEG_INFINITY);
    let mut expo_min = f64::INFINITY;
    for seed in 0..100u64 {
        let mut rng = stream(seed, "cvm-bands", 0);
        let z: Vec<f64> = (0..1000)
            .map(|_| Normal::new(0.0, 1.0).unwrap().sample(&mut rng))
            .collect();
        let u: Vec<f64> = (0..1000).map(|_| rng.random::<f64>()).collect();
        let e: Vec<f64> = (0..1000)
            .map(|_| Exp::new(1.0).unwrap().sample(&mut rng))
            .collect();
        let t = |x: &[f64]| fit_mle(x, DistFamily::Normal, 0.0).unwrap().cvm;
        if t(&z) < 0.5 {
            normal_ok += 1;
        }
        let tu = t(&u);
        uniform = (uniform.0.min(tu), uniform.1.max(tu));
        expo_min = expo_min.min(t(&e));
    }
    let mut pass = normal_ok >= 95 && uniform.0 >= 0.5 && uniform.1 <= 3.0 && expo_min > 4.0;
    let mut detail = format!(
        "normal T<0.5 in {normal_ok}/100; uniform T in [{:.3}, {:.3}]; exponential min T {:.3}",
        uniform.0, uniform.1, expo_min
    );
    pass &= within_budget(start.elapsed(), 120, &mut detail);
    Outcome { pass, detail }
}

/// Family ranking of the distribution study on the regression fixture.
fn criterion_3() -> Outcome {
    let start = Instant::now();
    let data = load("diabetes.csv", "progression", TaskKind::Regression);
    let space = LearnerKind::ElasticNet.default_space();
    let study = dist_study(&data, LearnerKind::ElasticNet, &space, 10, 200, 1).expect("study runs");
    let m = |f| study.median_cvm(f).unwrap_or(f64::NAN);
    let good = [
        DistFamily::Lognormal,
        DistFamily::Gamma,
        DistFamily::Invgamma,
        DistFamily::Loggamma,
    ];
    let good_worst = good.iter().map(|&f| m(f)).fold(f64::NEG_INFINITY, f64::max);
    let weibull_best = m(DistFamily::Weibull).min(m(DistFamily::Invweibull));
    let mut pass = weibull_best > good_worst && m(DistFamily::Normal) > m(DistFamily::Lognormal);
    let ranking: Vec<String> = study
        .summary()
        .iter()
        .map(|s| format!("{} {:.4}", s.family, s.median_cvm))
        .collect();
    let mut detail = format!(
        "diabetes, elastic_net, 10x200; median CvM: {}",
        ranking.join(", ")
    );
    pass &= within_budget(start.elapsed(), 600, &mut detail);
    Outcome { pass, detail }
}

struct PairedRun {
    name: &'static str,
    reports: Vec<PairedReport>,
}

fn paired_runs() -> (Vec<PairedRun>, Duration) {
    let start = Instant::now();
    let fixtures = [
        ("cancer_small", "diagnosis", TaskKind::Classification),
        ("wine_binary", "cultivar2", TaskKind::Classification),
        ("diabetes", "progression", TaskKind::Regression),
        ("concrete_small", "strength", TaskKind::Regression),
    ];
    let runs = fixtures
        .into_iter()
        .map(|(name, target, task)| {
            let data = load(&format!("{name}.csv"), target, task);
            let spec = PairedSpec {
                jobs: 1,
                ..PairedSpec::new(LearnerKind::ElasticNet, task, 100, 2024)
            };
            let space = LearnerKind::ElasticNet.default_space();
            let out = paired_compare(&space, &data, &spec).expect("paired run");
            PairedRun {
                name,
                reports: out.reports,
            }
        })
        .collect();
    (runs, start.elapsed())
}

/// Per-replication invariants of the paired harness.
fn criterion_4(runs: &[PairedRun]) -> Outcome {
    let mut violations = Vec::new();
    let mut total = 0;
    for run in runs {
        for r in &run.reports {
            total += 1;
            let ok = r.perf_ratio >= 1.0
                && r.eval_ratio > 0.0
                && r.eval_ratio <= 1.0
                && r.sqrs_evaluations <= 500
                && r.rs_fits == 500
                && r.identical == (r.rs_best_id == r.sqrs_best_id);
            if !ok {
                violations.push(format!("{} {} rep {}", run.name, r.setting, r.replication));
            }
        }
    }
    Outcome {
        pass: violations.is_empty() && total > 0,
        detail: format!(
            "{total} (replication, setting) reports, n_configs=50, K=10; {} violations{}",
            violations.len(),
            violations
                .first()
                .map(|v| format!(", first: {v}"))
                .unwrap_or_default()
        ),
    }
}

/// Identical-solution proportions and evaluation savings.
fn criterion_5(runs: &[PairedRun], elapsed: Duration) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for run in runs {
        let aggs = aggregate(&run.reports);
        let ident: Vec<f64> = aggs.iter().map(|a| a.identical_proportion).collect();
        let eval: Vec<f64> = aggs.iter().map(|a| a.median_eval_ratio).collect();
        let monotone = ident.windows(2).all(|w| w[0] <= w[1]);
        let ok = aggs.len() == 4
            && aggs.iter().all(|a| a.replications >= 100)
            && ident[3] >= 0.70
            && monotone
            && eval[0] <= 0.65
            && eval[3] <= 0.85;
        pass &= ok;
        parts.push(format!(
            "{} ident A-D {} eval A {:.3} D {:.3}",
            run.name,
            ident
                .iter()
                .map(|p| format!("{p:.2}"))
                .collect::<Vec<_>>()
                .join("/"),
            eval[0],
            eval[3]
        ));
    }
    let mut detail = format!(
        "elastic_net, 100 replications, 1 thread; {}",
        parts.join("; ")
    );
    pass &= within_budget(elapsed, 1800, &mut detail);
    Outcome { pass, detail }
}

/// Random-search winner against a brute-force table rebuilt from scratch
/// and from the cache export.
fn criterion_6() -> Outcome {
    let mut agree = 0;
    let mut mismatches = Vec::new();
    for i in 0..20u64 {
        let (kind, task) = if i % 2 == 0 {
            (LearnerKind::CartTree, TaskKind::Classification)
        } else {
            (LearnerKind::ElasticNet, TaskKind::Regression)
        };
        let synth = if task == TaskKind::Classification {
            seqtune_core::data::SyntheticKind::TwoGaussiansClassification
        } else {
            seqtune_core::data::SyntheticKind::LinearRegression
        };
        let mut rng = stream(i, "oracle-size", 0);
        let n = rng.random_range(30..80);
        let k = rng.random_range(3..7);
        let n_configs = rng.random_range(3..10);
        let data = seqtune_core::data::make_synthetic(synth, n, 3, 1.0, i).unwrap();
        let inst = ResamplingInstance::fixed(n, k, i)
            .unwrap()
            .for_dataset(&data)
            .unwrap();
        let space = kind.default_space();
        let mut cache = EvalCache::new();
        let rs = random_search(
            &space,
            kind,
            &data,
            &inst,
            n_configs,
            &mut stream(i, "oracle", 0),
            &mut cache,
        )
        .unwrap();

        let mut csv = Vec::new();
        cache.export_csv(&mut csv).unwrap();
        let exported = EvalCache::import_csv(csv.as_slice()).unwrap();
        let lk = LossKind::for_task(task);
        let mut best: Option<(f64, u64)> = None;
        let mut table_ok = true;
        for cfg in &rs.configs {
            let mut sum = 0.0;
            for (p, part) in inst.partitions().iter().enumerate() {
                let model = kind.fit(cfg, &data, &part.train).unwrap();
                let pred = model.predict(&data, &part.test).unwrap();
                let y: Vec<f64> = part.test.iter().map(|&r| data.target()[r]).collect();
                let l = loss(&y, &pred, lk).unwrap();
                table_ok &= exported.get(cfg.id, p) == Some(l);
                sum += l;
            }
            let mean = sum / k as f64;
            if best.is_none_or(|(m, id)| mean < m || (mean == m && cfg.id < id)) {
                best = Some((mean, cfg.id));
            }
        }
        if table_ok && best.map(|b| b.1) == Some(rs.best.id) {
            agree += 1;
        } else {
            mismatches.push(i);
        }
    }
    Outcome {
        pass: agree == 20,
        detail: format!(
            "{agree}/20 instances agree with the brute-force argmin; mismatches {mismatches:?}"
        ),
    }
}

/// Closed-form normal and lognormal fits on fixed samples.
fn criterion_7() -> Outcome {
    let normal = fit_mle(&[1.0, 2.0, 3.0, 4.0, 5.0], DistFamily::Normal, 0.0).unwrap();
    // logs are 0, ln2, 2 ln2, 3 ln2, 4 ln2: mean 2 ln2, variance 2 ln2^2
    let lognormal = fit_mle(&[1.0, 2.0, 4.0, 8.0, 16.0], DistFamily::Lognormal, 0.0).unwrap();
    let errs = [
        (normal.params[0] - 3.0).abs(),
        (normal.params[1].powi(2) - 2.0).abs(),
        (lognormal.params[0] - 1.386_294_361_119_890_6).abs(),
        (lognormal.params[1].powi(2) - 0.960_906_027_836_402_8).abs(),
    ];
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    Outcome {
        pass: worst <= 1e-12,
        detail: format!(
            "normal ({}, {}^2), lognormal ({}, {}^2); max abs error {worst:e}",
            normal.params[0], normal.params[1], lognormal.params[0], lognormal.params[1]
        ),
    }
}

/// Bootstrap test fraction for n = 300.
fn criterion_8() -> Outcome {
    let n = 300;
    let inst = make_bootstrap_instance(n, 1000, 8).unwrap();
    let parts = inst.partitions();
    let oob = parts
        .iter()
        .map(|p| p.test.len() as f64 / n as f64)
        .sum::<f64>()
        / parts.len() as f64;
    let in_bag = 1.0 - oob;
    let p_out = (1.0 - 1.0 / n as f64).powi(n as i32);
    let formula = 1.0 - p_out;
    let pass = (in_bag - formula).abs() <= 0.03 && (oob - p_out).abs() <= 0.03;
    Outcome {
        pass,
        detail: format!(
            "1-(1-1/n)^n = {formula:.4} is the expected in-bag fraction, observed {in_bag:.4}; \
             out-of-bag test fraction {oob:.4} vs (1-1/n)^n = {p_out:.4}"
        ),
    }
}

/// `compare` twice with one config gives byte-identical CSVs.
fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = format!(
        r#"{{
  "task": {{"source": "csv", "path": {}, "target": "strength", "task_kind": "regression"}},
  "learner": "elastic_net",
  "seed": 99,
  "tuner": {{"replications": 10}}
}}"#,
        serde_json::to_string(&fixtures().join("concrete_small.csv")).unwrap()
    );
    let cfg = dir.path().join("compare.json");
    std::fs::write(&cfg, config).unwrap();
    let run = |out: &str, jobs: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_seqtune"))
            .args(["compare", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(dir.path().join(out))
            .args(["--jobs", jobs])
            .output()
            .expect("binary runs");
        status.status.success()
    };
    if !(run("first", "1") && run("second", "2")) {
        return Outcome {
            pass: false,
            detail: "compare exited with an error".into(),
        };
    }
    let files = [
        "compare_reports.csv",
        "compare_aggregate.csv",
        "compare_decisions.csv",
    ];
    let same: Vec<bool> = files
        .iter()
        .map(|f| {
            let a = std::fs::read(dir.path().join("first").join(f)).unwrap();
            let b = std::fs::read(dir.path().join("second").join(f)).unwrap();
            !a.is_empty() && a == b
        })
        .collect();
    Outcome {
        pass: same.iter().all(|&s| s),
        detail: format!(
            "{} of {} CSVs byte-identical across two runs (jobs 1 and 2)",
            same.iter().filter(|&&s| s).count(),
            files.len()
        ),
    }
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "SLRT calibration", criterion_1()),
        (2, "CvM calibration bands", criterion_2()),
        (3, "distribution-study ranking", criterion_3()),
    ];
    let (runs, elapsed) = paired_runs();
    results.push((4, "paired-harness invariants", criterion_4(&runs)));
    results.push((
        5,
        "paired-harness reproduction",
        criterion_5(&runs, elapsed),
    ));
    results.push((6, "random-search oracle", criterion_6()));
    results.push((7, "closed-form MLE", criterion_7()));
    results.push((8, "bootstrap out-of-bag fraction", criterion_8()));
    results.push((9, "compare determinism", criterion_9()));

    let mut failed = 0;
    for (id, name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {id} {tag}: {name}: {}", o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
