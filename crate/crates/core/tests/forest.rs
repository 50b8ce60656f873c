use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stressuq::forest::{ForestHyperparams, RegressionForest, TargetKind};
use stressuq::{ErrorKind, Matrix};

/// `n` rows of `f` uniform features and two smooth targets plus noise.
fn synthetic(n: usize, f: usize, noise: f64, seed: u64) -> (Matrix, Matrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Matrix::with_cols(f);
    let mut y = Matrix::with_cols(2);
    for _ in 0..n {
        let row: Vec<f64> = (0..f).map(|_| rng.random_range(-1.0..1.0)).collect();
        let a = (3.0 * row[0]).sin() + row[1] * row[1];
        let b = row[0] * row[1] - 0.5 * row[2];
        x.push_row(&row).unwrap();
        y.push_row(&[
            a + noise * rng.random_range(-1.0..1.0),
            b + noise * rng.random_range(-1.0..1.0),
        ])
        .unwrap();
    }
    (x, y)
}

fn single_tree(max_depth: usize, f: usize) -> ForestHyperparams {
    ForestHyperparams {
        max_depth,
        min_samples_split: 2,
        max_features: f,
        n_trees: 1,
        seed: 0,
        bootstrap: false,
    }
}

fn predictions(forest: &RegressionForest, x: &Matrix) -> Vec<Vec<f64>> {
    x.rows().map(|r| forest.predict(r).unwrap()).collect()
}

#[test]
fn deep_tree_interpolates_distinct_inputs() {
    let (x, y) = synthetic(200, 4, 0.1, 1);
    let forest = RegressionForest::fit(&x, &y, &single_tree(64, 4)).unwrap();
    assert_eq!(forest.mse(&x, &y).unwrap(), 0.0);
}

#[test]
fn training_error_falls_with_depth() {
    let (x, y) = synthetic(300, 4, 0.1, 2);
    let mut last = f64::INFINITY;
    for depth in 1..=8 {
        let f = RegressionForest::fit(&x, &y, &single_tree(depth, 4)).unwrap();
        let mse = f.mse(&x, &y).unwrap();
        assert!(mse <= last, "depth {depth}: {mse} > {last}");
        last = mse;
    }
}

#[test]
fn row_order_does_not_matter_without_bootstrap() {
    let (x, y) = synthetic(150, 3, 0.05, 3);
    let mut idx: Vec<usize> = (0..150).collect();
    idx.reverse();
    idx.rotate_left(37);
    let xp = x.select_rows(&idx);
    let yp = y.select_rows(&idx);
    let hp = single_tree(6, 3);
    let a = RegressionForest::fit(&x, &y, &hp).unwrap();
    let b = RegressionForest::fit(&xp, &yp, &hp).unwrap();
    let (probe, _) = synthetic(100, 3, 0.0, 99);
    assert_eq!(predictions(&a, &probe), predictions(&b, &probe));
}

#[test]
fn training_is_deterministic() {
    let (x, y) = synthetic(200, 6, 0.1, 4);
    let hp = ForestHyperparams::for_target(TargetKind::Pcorr, 11);
    let a = RegressionForest::fit(&x, &y, &hp).unwrap();
    let b = RegressionForest::fit(&x, &y, &hp).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
}

#[test]
fn predictions_stay_within_the_training_range() {
    let (x, y) = synthetic(200, 6, 0.2, 5);
    let hp = ForestHyperparams::for_target(TargetKind::Pcorr, 1);
    let forest = RegressionForest::fit(&x, &y, &hp).unwrap();
    let (probe, _) = synthetic(300, 6, 0.0, 6);
    for j in 0..2 {
        let col = y.column(j);
        let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for p in predictions(&forest, &probe) {
            assert!(p[j] >= lo && p[j] <= hi);
        }
    }
}

#[test]
fn bagging_does_not_hurt_on_noisy_data() {
    let (x, y) = synthetic(400, 6, 0.3, 7);
    let (xt, yt) = synthetic(400, 6, 0.3, 8);
    let many = ForestHyperparams::for_target(TargetKind::PcorrAngles, 3);
    let one = ForestHyperparams {
        n_trees: 1,
        ..many.clone()
    };
    let m30 = RegressionForest::fit(&x, &y, &many)
        .unwrap()
        .mse(&xt, &yt)
        .unwrap();
    let m1 = RegressionForest::fit(&x, &y, &one)
        .unwrap()
        .mse(&xt, &yt)
        .unwrap();
    assert!(m30 <= m1, "{m30} vs {m1}");
}

#[test]
fn saved_forest_predicts_identically() {
    let (x, y) = synthetic(200, 6, 0.1, 9);
    let y1 = Matrix::from_rows(&y.rows().map(|r| vec![r[0]]).collect::<Vec<_>>()).unwrap();
    let hp = ForestHyperparams::for_target(TargetKind::P, 5);
    let names: Vec<String> = (0..6).map(|i| format!("q{i}")).collect();
    let forest = RegressionForest::fit_named(&x, &y1, &hp, names, vec!["p".into()]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("forest.json");
    forest.save(&path).unwrap();
    let back = RegressionForest::load(&path).unwrap();
    let (probe, _) = synthetic(100, 6, 0.0, 10);
    assert_eq!(predictions(&forest, &probe), predictions(&back, &probe));
    assert_eq!(back.hyperparams(), &hp);
}

#[test]
fn wrong_version_and_empty_files_are_rejected() {
    let (x, y) = synthetic(50, 3, 0.1, 11);
    let forest = RegressionForest::fit(&x, &y, &single_tree(3, 3)).unwrap();
    let text = forest
        .to_json()
        .unwrap()
        .replacen("\"version\": 1", "\"version\": 99", 1);
    let err = RegressionForest::from_json(&text).unwrap_err();
    assert_eq!(err.kind(), ErrorKind::Data);
    assert!(err.to_string().contains("version"));
    assert!(RegressionForest::from_json("").is_err());
}
