use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::*;
use crate::dataset::Dataset;
use crate::features::{FeatureMap, Method};
use crate::rng::SeededRng;

fn gaussian_problem(n: usize, c: usize, seed: u64) -> (Features, Vec<f64>) {
    let mut s = SeededRng::new(seed).stream();
    let z = DMatrix::from_fn(n, c, |_, _| s.sample::<f64, _>(StandardNormal));
    let y = (0..n).map(|_| s.sample::<f64, _>(StandardNormal)).collect();
    (Features::Dense(z), y)
}

/// `(Z^T Z + ridge I)^{-1} Z^T y` by explicit inversion.
fn normal_equations_oracle(z: &DMatrix<f64>, y: &[f64], ridge: f64) -> Vec<f64> {
    let a = z.transpose() * z + DMatrix::identity(z.ncols(), z.ncols()) * ridge;
    let w = a.try_inverse().unwrap() * z.transpose() * DVector::from_column_slice(y);
    w.data.into()
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    d / b.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[test]
fn constant_feature_closed_form() {
    let z = Features::Dense(DMatrix::from_element(2, 1, 1.0));
    let w = ridge_exact(&z, &[1.0, 3.0], 1.0).unwrap();
    assert!((w[0] - 4.0 / 3.0).abs() < 1e-14);
}

#[test]
fn orthonormal_features_decouple() {
    let z = Features::Dense(DMatrix::identity(3, 3));
    let y = [1.0, -2.0, 0.5];
    let w = ridge_exact(&z, &y, 0.25).unwrap();
    for (wj, yj) in w.iter().zip(y) {
        assert!((wj - yj / 1.25).abs() < 1e-14);
    }
}

#[test]
fn weights_shrink_with_ridge() {
    let (z, y) = gaussian_problem(30, 10, 1);
    let norms: Vec<f64> = [1e-3, 1e-1, 1.0, 10.0, 1e3, 1e6]
        .iter()
        .map(|&r| ridge_exact(&z, &y, r).unwrap().iter().map(|w| w * w).sum::<f64>())
        .collect();
    assert!(norms.windows(2).all(|p| p[1] < p[0]), "{norms:?}");
    assert!(norms.last().unwrap().sqrt() < 1e-3);
}

#[test]
fn primal_and_dual_match_oracle() {
    for (n, c) in [(40, 10), (10, 40)] {
        let (z, y) = gaussian_problem(n, c, 3);
        let w = ridge_exact(&z, &y, 0.1).unwrap();
        let oracle = normal_equations_oracle(z.as_dense().unwrap(), &y, 0.1);
        assert!(rel_err(&w, &oracle) < 1e-9, "n={n} c={c}");
    }
}

#[test]
fn sparse_and_dense_solutions_agree() {
    let pts: Vec<Vec<f64>> = {
        let mut s = SeededRng::new(4).stream();
        (0..25).map(|_| vec![s.gen(), s.gen()]).collect()
    };
    let y: Vec<f64> = pts.iter().map(|p| (3.0 * p[0]).sin() + p[1]).collect();
    let map = FeatureMap::build(&pts, Method::Mondrian, 6, 3.0, &SeededRng::new(1)).unwrap();
    let z = map.featurize(&pts, 3.0).unwrap();
    let dense = Features::Dense(z.to_dense());
    let a = ridge_exact(&z, &y, 1e-2).unwrap();
    let b = ridge_exact(&dense, &y, 1e-2).unwrap();
    assert!(rel_err(&a, &b) < 1e-10);
}

#[test]
fn exact_solution_is_a_minimum() {
    let (z, y) = gaussian_problem(50, 20, 5);
    let ridge = 1e-4;
    let w = ridge_exact(&z, &y, ridge).unwrap();
    let base = ridge_objective(&z, &y, &w, ridge);
    let mut s = SeededRng::new(6).stream();
    for _ in 0..200 {
        let dir: Vec<f64> = (0..20).map(|_| s.sample::<f64, _>(StandardNormal)).collect();
        let len = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        for sign in [1e-3, -1e-3] {
            let moved: Vec<f64> = w.iter().zip(&dir).map(|(a, d)| a + sign * d / len).collect();
            assert!(ridge_objective(&z, &y, &moved, ridge) >= base);
        }
    }
}

#[test]
fn shape_mismatch_is_an_error() {
    let (z, _) = gaussian_problem(5, 2, 0);
    assert!(matches!(ridge_exact(&z, &[1.0; 4], 1.0), Err(Error::ShapeMismatch(_))));
    assert!(ridge_exact(&z, &[1.0; 5], 0.0).is_err());
}

#[test]
fn sgd_matches_exact_solver() {
    let config = SgdConfig::default();
    for seed in 0..10 {
        let (z, y) = gaussian_problem(100, 50, 100 + seed);
        let exact = ridge_exact(&z, &y, DEFAULT_RIDGE).unwrap();
        let mut s = SeededRng::new(seed).stream();
        let sgd = ridge_sgd(&z, &y, DEFAULT_RIDGE, &config, &mut s).unwrap();
        assert!(rel_err(&sgd, &exact) <= 1e-3, "seed {seed}: {}", rel_err(&sgd, &exact));
    }
}

#[test]
fn sgd_zero_targets_give_zero_weights() {
    let (z, _) = gaussian_problem(40, 10, 2);
    let mut s = SeededRng::new(0).stream();
    let w = ridge_sgd(&z, &[0.0; 40], 1e-4, &SgdConfig::default(), &mut s).unwrap();
    assert!(w.iter().map(|v| v * v).sum::<f64>().sqrt() <= 1e-6);
}

#[test]
fn sgd_is_deterministic() {
    let (z, y) = gaussian_problem(60, 15, 8);
    let run = || {
        let mut s = SeededRng::new(12).stream();
        ridge_sgd(&z, &y, 1e-4, &SgdConfig::default(), &mut s).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn sgd_reports_divergence() {
    let (z, y) = gaussian_problem(60, 15, 8);
    let config = SgdConfig {
        step_scale: 40.0,
        ..SgdConfig::default()
    };
    let mut s = SeededRng::new(1).stream();
    let err = ridge_sgd(&z, &y, 1e-4, &config, &mut s).unwrap_err();
    assert!(matches!(err, Error::Diverged { .. }), "{err}");
}

#[test]
fn metric_examples() {
    let y = [1.0, -2.0, 2.0];
    let m = metrics(&y, &y).unwrap();
    assert_eq!((m.rmse, m.relative_error), (0.0, 0.0));
    assert!((metrics(&[0.0; 3], &y).unwrap().relative_error - 1.0).abs() < 1e-15);
    let shifted: Vec<f64> = y.iter().map(|v| v + 0.7).collect();
    assert!((metrics(&shifted, &y).unwrap().rmse - 0.7).abs() < 1e-14);
    assert!(matches!(metrics(&[1.0], &[0.0]), Err(Error::ZeroTargetNorm)));
}

#[test]
fn evaluation_lifetimes_subsample_cut_times() {
    let cuts: Vec<f64> = (1..=1000).map(|i| i as f64 / 100.0).collect();
    assert_eq!(
        evaluation_lifetimes(&cuts[..3], 5.0, 200).unwrap(),
        vec![0.01, 0.02, 0.03, 5.0]
    );
    let sub = evaluation_lifetimes(&cuts, 10.0, 50).unwrap();
    assert!(sub.len() <= 50 && sub.len() > 30);
    assert_eq!(*sub.last().unwrap(), 10.0);
    assert!(sub.windows(2).all(|p| p[0] < p[1]));
    assert!(sub.iter().all(|t| cuts.contains(t)));
    assert_eq!(evaluation_lifetimes(&[], 2.0, 200).unwrap(), vec![2.0]);
}

fn regression_splits(n: usize, seed: u64) -> (Dataset, Dataset, Dataset) {
    let mut s = SeededRng::new(seed).stream();
    let make = |s: &mut rand_chacha::ChaCha8Rng| {
        let pts: Vec<Vec<f64>> = (0..n).map(|_| vec![s.gen(), s.gen()]).collect();
        let y = pts
            .iter()
            .map(|p| (6.0 * p[0]).sin() * (4.0 * p[1]).cos() + 0.05 * s.sample::<f64, _>(StandardNormal))
            .collect();
        Dataset::new(pts, Some(y)).unwrap()
    };
    (make(&mut s), make(&mut s), make(&mut s))
}

#[test]
fn sweep_matches_independent_refits() {
    let (tr, va, te) = regression_splits(40, 1);
    let config = SweepConfig::new(Method::RotatedMondrian, 8, 12.0);
    let rng = SeededRng::new(3);
    let result = lifetime_sweep(&tr, &va, &te, &config, &rng).unwrap();
    assert!(result.points.windows(2).all(|p| p[0].lifetime < p[1].lifetime));
    assert_eq!(result.points.last().unwrap().lifetime, 12.0);

    let all: Vec<Vec<f64>> = [&tr, &va, &te].iter().flat_map(|d| d.points().to_vec()).collect();
    let map = FeatureMap::build(&all, Method::RotatedMondrian, 8, 12.0, &rng.derive(0)).unwrap();
    let train_rows: Vec<usize> = (0..40).collect();
    let test_rows: Vec<usize> = (80..120).collect();
    for p in result.points.iter().step_by(7) {
        let z = map.featurize(&all, p.lifetime).unwrap();
        let w = ridge_exact(&z.select_rows(&train_rows), tr.targets().unwrap(), DEFAULT_RIDGE).unwrap();
        let m = evaluate(&w, &z.select_rows(&test_rows), te.targets().unwrap()).unwrap();
        assert!((m.rmse - p.test.rmse).abs() < 1e-8, "{} vs {}", m.rmse, p.test.rmse);
        assert_eq!(p.n_features, z.n_cols());
    }
}

/// Spearman rank correlation (no ties expected).
fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let rank = |v: &[f64]| {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let mut r = vec![0.0; v.len()];
        for (k, &i) in idx.iter().enumerate() {
            r[i] = k as f64;
        }
        r
    };
    let (ra, rb) = (rank(a), rank(b));
    let n = a.len() as f64;
    let d2: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - y) * (x - y)).sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}

#[test]
fn training_error_falls_with_lifetime() {
    let (tr, va, te) = regression_splits(40, 2);
    for method in [Method::Mondrian, Method::RotatedMondrian] {
        let config = SweepConfig::new(method, 10, 30.0);
        let r = lifetime_sweep(&tr, &va, &te, &config, &SeededRng::new(9)).unwrap();
        let l: Vec<f64> = r.points.iter().map(|p| p.lifetime).collect();
        let e: Vec<f64> = r.points.iter().map(|p| p.train.rmse).collect();
        assert!(spearman(&l, &e) <= 0.0);
        let best = r.best_point().validation.rmse;
        assert!(r.points.iter().all(|p| p.validation.rmse >= best));
    }
}

#[test]
fn sweep_below_first_cut_has_one_point() {
    let (tr, va, te) = regression_splits(10, 3);
    let config = SweepConfig::new(Method::Mondrian, 3, 1e-9);
    let r = lifetime_sweep(&tr, &va, &te, &config, &SeededRng::new(0)).unwrap();
    assert_eq!(r.points.len(), 1);
    assert_eq!(r.points[0].n_features, 3);
    assert_eq!(r.lifetime_hat(), 1e-9);
}

#[test]
fn sweep_rejects_non_partition_methods() {
    let (tr, va, te) = regression_splits(10, 3);
    let config = SweepConfig::new(Method::Fourier, 3, 1.0);
    assert!(matches!(
        lifetime_sweep(&tr, &va, &te, &config, &SeededRng::new(0)),
        Err(Error::Unsupported(_))
    ));
}

#[test]
fn sweep_is_reproducible_and_sgd_tracks_exact() {
    let (tr, va, te) = regression_splits(30, 5);
    let mut config = SweepConfig::new(Method::RotatedMondrian, 5, 8.0);
    config.max_evaluations = 15;
    let rng = SeededRng::new(21);
    let a = lifetime_sweep(&tr, &va, &te, &config, &rng).unwrap();
    assert_eq!(a, lifetime_sweep(&tr, &va, &te, &config, &rng).unwrap());

    config.ridge.solver = Solver::Sgd(SgdConfig::default());
    config.warm_start = false;
    let cold = lifetime_sweep(&tr, &va, &te, &config, &rng).unwrap();
    config.warm_start = true;
    let warm = lifetime_sweep(&tr, &va, &te, &config, &rng).unwrap();
    assert_eq!(a.points.len(), cold.points.len());
    for ((p, q), r) in a.points.iter().zip(&cold.points).zip(&warm.points) {
        assert_eq!(p.lifetime, q.lifetime);
        assert!((p.test.rmse - q.test.rmse).abs() < 1e-3 * p.test.rmse);
        // Warm starts only agree on what the training rows determine.
        assert!((p.train.rmse - r.train.rmse).abs() < 1e-3 * p.train.rmse.max(1e-3));
    }
}

#[test]
fn sweep_csv_schema() {
    let (tr, va, te) = regression_splits(10, 3);
    let config = SweepConfig::new(Method::Mondrian, 3, 2.0);
    let r = lifetime_sweep(&tr, &va, &te, &config, &SeededRng::new(0)).unwrap();
    let mut buf = Vec::new();
    r.write_csv(&mut buf, ErrorMetric::Relative).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("lambda,train,validation,test\n"));
    assert_eq!(text.lines().count(), r.points.len() + 1);
}

#[test]
fn golden_section_budget_and_accuracy() {
    let config = SearchConfig {
        lower: 1e-3,
        upper: 1e3,
        budget: 3,
    };
    let r = golden_section_search(|_| Ok(1.0), &config).unwrap();
    assert_eq!(r.probes.len(), 3);
    let smallest = r.probes.iter().map(|p| p.lifetime).fold(f64::INFINITY, f64::min);
    assert_eq!(r.best.lifetime, smallest);

    let target: f64 = 2.7;
    for budget in [5, 10, 25] {
        let config = SearchConfig {
            budget,
            ..config.clone()
        };
        let r = golden_section_search(|l| Ok((l.ln() - target.ln()).powi(2)), &config).unwrap();
        assert_eq!(r.probes.len(), budget);
        assert!((r.best.lifetime - target).abs() <= r.bracket_width(), "budget {budget}");
        assert!(r.bracket.0 <= target && target <= r.bracket.1);
    }
    assert!(golden_section_search(
        |_| Ok(0.0),
        &SearchConfig {
            lower: 2.0,
            upper: 1.0,
            budget: 5
        }
    )
    .is_err());
    assert!(golden_section_search(
        |_| Ok(0.0),
        &SearchConfig {
            lower: 1.0,
            upper: 2.0,
            budget: 2
        }
    )
    .is_err());
}

#[test]
fn bandwidth_search_on_binning_and_fourier() {
    let (tr, va, _) = regression_splits(40, 6);
    let config = SearchConfig {
        lower: 0.1,
        upper: 100.0,
        budget: 8,
    };
    for method in [Method::Binning, Method::Fourier] {
        let rng = SeededRng::new(4);
        let r = bandwidth_search(method, &tr, &va, 30, &RidgeConfig::default(), &config, &rng).unwrap();
        assert_eq!(r.probes.len(), 8);
        let again = bandwidth_search(method, &tr, &va, 30, &RidgeConfig::default(), &config, &rng).unwrap();
        assert_eq!(r, again);
    }
    assert!(bandwidth_search(
        Method::Mondrian,
        &tr,
        &va,
        3,
        &RidgeConfig::default(),
        &config,
        &SeededRng::new(0)
    )
    .is_err());
}
