use std::fs::File;
use std::path::Path;

use seqtune_core::data::CsvSchema;
use seqtune_core::dist_fit::dist_study;
use seqtune_core::rng::stream;
use seqtune_core::tuner::{random_search, sqrs, write_duels_csv, SqrsOptions};
use seqtune_core::{
    Dataset, DistFamily, EvalCache, LearnerKind, ResamplingInstance, Setting, TaskKind,
};

fn fixture(name: &str, target: &str, task: TaskKind) -> Dataset {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name);
    Dataset::load_csv(path, &CsvSchema::new(target, task)).unwrap()
}

#[test]
fn fixtures_load_with_expected_shapes() {
    let concrete = fixture("concrete_small.csv", "strength", TaskKind::Regression);
    assert_eq!(concrete.n_features(), 8);
    let cancer = fixture("cancer_small.csv", "diagnosis", TaskKind::Classification);
    assert_eq!(cancer.task(), TaskKind::Classification);
    assert!(cancer.class_labels().is_some());
}

#[test]
fn sqrs_replays_random_search_without_new_fits() {
    let data = fixture("wine_binary.csv", "cultivar2", TaskKind::Classification);
    let inst = ResamplingInstance::fixed(data.n_rows(), 10, 4)
        .unwrap()
        .for_dataset(&data)
        .unwrap();
    let space = LearnerKind::ElasticNet.default_space();
    let mut cache = EvalCache::new();
    let rs = random_search(
        &space,
        LearnerKind::ElasticNet,
        &data,
        &inst,
        30,
        &mut stream(4, "configs", 0),
        &mut cache,
    )
    .unwrap();
    assert_eq!(rs.fits, 300);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cache.csv");
    cache.export_csv(File::create(&path).unwrap()).unwrap();
    let mut replay = EvalCache::import_csv(File::open(&path).unwrap()).unwrap();
    assert_eq!(replay.len(), 300);

    let options = SqrsOptions::new(Setting::A.config(10).unwrap(), data.task());
    let a = sqrs(
        &rs.configs,
        LearnerKind::ElasticNet,
        &data,
        &inst,
        &options,
        &mut cache,
    )
    .unwrap();
    let b = sqrs(
        &rs.configs,
        LearnerKind::ElasticNet,
        &data,
        &inst,
        &options,
        &mut replay,
    )
    .unwrap();
    assert_eq!(a.fits, 0);
    assert_eq!(b.fits, 0);
    assert!(a.evaluations <= 300);

    let (mut x, mut y) = (Vec::new(), Vec::new());
    write_duels_csv(&a.duels, &mut x).unwrap();
    write_duels_csv(&b.duels, &mut y).unwrap();
    assert_eq!(x, y);
    assert_eq!(a.duels.len(), 29);
}

#[test]
fn sqrs_fits_stay_within_the_random_search_budget() {
    let data = fixture("concrete_small.csv", "strength", TaskKind::Regression);
    let inst = ResamplingInstance::fixed(data.n_rows(), 10, 8)
        .unwrap()
        .for_dataset(&data)
        .unwrap();
    let space = LearnerKind::CartTree.default_space();
    let configs = space.sample_configs(&mut stream(8, "configs", 0), 40, 0);
    for setting in Setting::ALL {
        let mut cache = EvalCache::new();
        let options = SqrsOptions::new(setting.config(10).unwrap(), data.task());
        let res = sqrs(
            &configs,
            LearnerKind::CartTree,
            &data,
            &inst,
            &options,
            &mut cache,
        )
        .unwrap();
        assert_eq!(res.fits, res.evaluations);
        assert!(res.fits <= 400);
        assert!(space.validate_config(&res.incumbent));
        for d in &res.duels {
            assert!(d.steps >= 2 && d.steps <= 10);
        }
    }
}

#[test]
fn classification_study_includes_beta() {
    let data = fixture("cancer_small.csv", "diagnosis", TaskKind::Classification);
    let space = LearnerKind::CartTree.default_space();
    let study = dist_study(&data, LearnerKind::CartTree, &space, 3, 40, 2).unwrap();
    assert_eq!(study.losses.len(), 3);
    assert!(study.losses.iter().all(|l| l.len() == 40));
    let families: Vec<DistFamily> = study.summary().iter().map(|s| s.family).collect();
    assert!(families.contains(&DistFamily::Beta));
    assert_eq!(study.rows.len() + study.failures.len(), 3 * 8);
    for r in &study.rows {
        assert!(r.fit.cvm.is_finite() && r.fit.cvm > 0.0);
        assert!(r.fit.loglik.is_finite());
    }
}
