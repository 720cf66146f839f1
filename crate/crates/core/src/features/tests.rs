use super::*;
use crate::kernels::{laplace_kernel, quadrature::adaptive_simpson, IsotropicLimit};

fn two_points(x: &[f64], y: &[f64]) -> Vec<Vec<f64>> {
    vec![x.to_vec(), y.to_vec()]
}

#[test]
fn method_names_round_trip() {
    for m in Method::ALL {
        assert_eq!(m.name().parse::<Method>().unwrap(), m);
        assert_eq!(m.to_string(), m.name());
    }
    assert!("laplace".parse::<Method>().is_err());
}

#[test]
fn mondrian_estimate_converges_to_laplace() {
    let (x, y) = ([0.3, 0.3], [0.5, 0.5]);
    let pts = two_points(&x, &y);
    let map = FeatureMap::build(&pts, Method::Mondrian, 2000, 1.0, &SeededRng::new(11)).unwrap();
    let k = map.kernel_estimate(&x, &y, 1.0).unwrap();
    assert!((k - (-0.4f64).exp()).abs() < 0.04, "k = {k}");
}

#[test]
fn rotated_estimate_converges_to_isotropic_limit() {
    let (x, y) = ([0.1, 0.2], [0.4, 0.6]);
    let pts = two_points(&x, &y);
    let lambda = 1.5;
    let map = FeatureMap::build(&pts, Method::RotatedMondrian, 5000, lambda, &SeededRng::new(5)).unwrap();
    let k = map.kernel_estimate(&x, &y, lambda).unwrap();
    let limit = IsotropicLimit::new(lambda, 2).unwrap().eval(0.5).unwrap();
    assert!((k - limit).abs() < 0.025, "k = {k}, limit = {limit}");
}

#[test]
fn binning_estimate_matches_gamma_pitch_integral() {
    let (lambda, delta) = (2.0, 0.5);
    // P(same bin) = E[(1 - delta / pitch)_+] with pitch ~ Gamma(2, 1/lambda).
    let density = |p: f64| lambda * lambda * p * (-lambda * p).exp();
    let oracle = adaptive_simpson(&|p: f64| (1.0 - delta / p) * density(p), delta, 60.0, 1e-12);
    assert!((oracle - (-1.0f64).exp()).abs() < 1e-8);

    let pts = vec![vec![0.0], vec![delta]];
    let map = FeatureMap::build(&pts, Method::Binning, 10_000, lambda, &SeededRng::new(3)).unwrap();
    let k = map.kernel_estimate(&pts[0], &pts[1], lambda).unwrap();
    assert!((k - oracle).abs() < 0.02, "k = {k}, oracle = {oracle}");
}

#[test]
fn fourier_estimate_converges_to_laplace() {
    let (x, y) = ([0.0, 0.0], [0.2, 0.1]);
    let pts = two_points(&x, &y);
    let map = FeatureMap::build(&pts, Method::Fourier, 5000, 1.0, &SeededRng::new(9)).unwrap();
    let k = map.kernel_estimate(&x, &y, 1.0).unwrap();
    assert!((k - laplace_kernel(&x, &y, 1.0)).abs() < 0.05, "k = {k}");
}

fn random_points(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut s = SeededRng::new(seed).stream();
    (0..n).map(|_| (0..d).map(|_| s.gen::<f64>()).collect()).collect()
}

#[test]
fn features_reproduce_kernel_estimate_and_are_psd() {
    let pts = random_points(30, 3, 1);
    for method in Method::ALL {
        let map = FeatureMap::build(&pts, method, 40, 2.0, &SeededRng::new(2)).unwrap();
        let z = map.featurize(&pts, 2.0).unwrap();
        assert_eq!(z.n_rows(), 30);
        let gram = z.row_gram();
        for i in 0..30 {
            for j in 0..30 {
                let k = map.kernel_estimate(&pts[i], &pts[j], 2.0).unwrap();
                assert!((gram[(i, j)] - k).abs() < 1e-12, "{method}");
                assert_eq!(gram[(i, j)], gram[(j, i)]);
            }
        }
        let min_eig = gram.symmetric_eigenvalues().min();
        assert!(min_eig >= -1e-10, "{method}: {min_eig}");
    }
}

#[test]
fn one_hot_rows_have_one_entry_per_component() {
    let pts = random_points(25, 2, 4);
    for method in [Method::Mondrian, Method::RotatedMondrian, Method::Binning] {
        let map = FeatureMap::build(&pts, method, 7, 3.0, &SeededRng::new(8)).unwrap();
        let z = map.featurize(&pts, 3.0).unwrap();
        let s = z.as_sparse().unwrap();
        for row in s.rows() {
            assert_eq!(row.len(), 7);
            for &(_, v) in row {
                assert!((v - 1.0 / 7f64.sqrt()).abs() < 1e-15);
            }
        }
        // Every index is used: no empty cells among construction points.
        assert_eq!(s.nonzero_features(&(0..25).collect::<Vec<_>>()), s.n_features());
    }
}

#[test]
fn partition_codes_follow_cumulative_offsets() {
    let pts = random_points(20, 2, 6);
    let map = FeatureMap::build(&pts, Method::Mondrian, 3, 4.0, &SeededRng::new(1)).unwrap();
    let z = map.featurize(&pts, 4.0).unwrap();
    let comps = map.partition_components().unwrap();
    let mut offset = 0;
    for (k, c) in comps.iter().enumerate() {
        for (i, p) in pts.iter().enumerate() {
            let leaf = c.tree().cell_index(p, 4.0).unwrap();
            assert_eq!(z.as_sparse().unwrap().row(i)[k].0, offset + leaf);
        }
        offset += c.tree().n_cells(4.0);
    }
    assert_eq!(z.n_cols(), offset);
}

#[test]
fn lifetime_zero_gives_a_single_cell() {
    let pts = random_points(10, 2, 2);
    let map = FeatureMap::build(&pts, Method::RotatedMondrian, 1, 1.0, &SeededRng::new(0)).unwrap();
    let z = map.featurize(&pts, 0.0).unwrap();
    assert_eq!(z.n_cols(), 1);
    assert!(z.row_gram().iter().all(|&v| (v - 1.0).abs() < 1e-15));
}

#[test]
fn truncation_equals_smaller_build() {
    let pts = random_points(15, 2, 3);
    for method in Method::ALL {
        let rng = SeededRng::new(21);
        let big = FeatureMap::build(&pts, method, 12, 2.0, &rng).unwrap();
        let small = FeatureMap::build(&pts, method, 5, 2.0, &rng).unwrap();
        let a = big.truncated(5).unwrap().featurize(&pts, 2.0).unwrap().to_dense();
        let b = small.featurize(&pts, 2.0).unwrap().to_dense();
        assert_eq!(a, b, "{method}");
    }
}

#[test]
fn same_seed_same_features_across_thread_counts() {
    let pts = random_points(40, 3, 5);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                FeatureMap::build(&pts, Method::RotatedMondrian, 16, 3.0, &SeededRng::new(77))
                    .unwrap()
                    .featurize(&pts, 3.0)
                    .unwrap()
                    .to_dense()
            })
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn out_of_box_rows_are_reported() {
    let pts = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
    let map = FeatureMap::build(&pts, Method::Mondrian, 2, 1.0, &SeededRng::new(0)).unwrap();
    let query = vec![vec![0.5, 0.5], vec![2.0, 0.5], vec![0.1, 0.1], vec![-1.0, 0.0]];
    match map.featurize(&query, 1.0) {
        Err(Error::OutOfDomain { rows }) => assert_eq!(rows, vec![1, 3]),
        other => panic!("expected OutOfDomain, got {other:?}"),
    }
}

#[test]
fn lifetime_beyond_horizon_is_rejected() {
    let pts = random_points(5, 2, 0);
    let map = FeatureMap::build_with_horizon(&pts, Method::Mondrian, 2, 1.0, 3.0, &SeededRng::new(0)).unwrap();
    assert!(map.featurize(&pts, 3.0).is_ok());
    assert!(map.featurize(&pts, 3.5).is_err());
    assert!(FeatureMap::build(&pts, Method::Mondrian, 0, 1.0, &SeededRng::new(0)).is_err());
    assert!(FeatureMap::build(&pts, Method::Fourier, 2, 0.0, &SeededRng::new(0)).is_err());
}

#[test]
fn binning_counts_distinct_bins() {
    let pts = vec![vec![0.0], vec![0.0], vec![10.0]];
    let s = binning_features(&pts, 4, 100.0, &SeededRng::new(2)).unwrap();
    assert_eq!(s.n_features(), 8);
    assert_eq!(s.row(0), s.row(1));
}

#[test]
fn fourier_features_have_expected_scale() {
    let pts = random_points(6, 2, 1);
    let z = fourier_features(&pts, 10, 1.0, &SeededRng::new(3)).unwrap();
    let bound = (2.0f64 / 10.0).sqrt();
    assert!(z.iter().all(|v| v.abs() <= bound + 1e-15));
}
