use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::KernelSpec;
use crate::error::{Error, Result};

/// Diagonal jitter escalation used when factorizing a covariance matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JitterSchedule {
    /// First jitter as a multiple of the mean diagonal.
    pub initial_relative: f64,
    pub factor: f64,
    pub max_escalations: u32,
}

impl Default for JitterSchedule {
    fn default() -> Self {
        Self {
            initial_relative: 1e-10,
            factor: 10.0,
            max_escalations: 8,
        }
    }
}

/// `K[i][j] = kernel(x_i, x_j)`, assembled row-parallel.
pub fn gram_matrix<P: AsRef<[f64]> + Sync>(points: &[P], kernel: &KernelSpec) -> DMatrix<f64> {
    let n = points.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..=i)
                .map(|j| kernel.eval(points[i].as_ref(), points[j].as_ref()))
                .collect()
        })
        .collect();
    let mut k = DMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// Lower Cholesky factor of `cov + jitter I`, escalating the jitter on
/// failure.
pub(crate) fn cholesky_with_jitter(cov: &DMatrix<f64>, schedule: &JitterSchedule) -> Result<(DMatrix<f64>, f64)> {
    let n = cov.nrows();
    let diag = cov.diagonal();
    let mean_diagonal = diag.iter().sum::<f64>() / n as f64;
    let min_diagonal = diag.iter().copied().fold(f64::INFINITY, f64::min);
    let mut jitter = schedule.initial_relative * mean_diagonal.abs().max(f64::MIN_POSITIVE);
    for attempt in 0..=schedule.max_escalations {
        let mut m = cov.clone();
        for i in 0..n {
            m[(i, i)] += jitter;
        }
        if let Some(ch) = m.cholesky() {
            return Ok((ch.l(), jitter));
        }
        if attempt < schedule.max_escalations {
            jitter *= schedule.factor;
        }
    }
    Err(Error::Cholesky {
        jitter,
        mean_diagonal,
        min_diagonal,
    })
}

/// Draws targets `y ~ N(0, K + noise_sd^2 I)` at `points`.
pub fn gp_sample<P, R>(points: &[P], kernel: &KernelSpec, noise_sd: f64, rng: &mut R) -> Result<Vec<f64>>
where
    P: AsRef<[f64]> + Sync,
    R: Rng + ?Sized,
{
    if points.is_empty() {
        return Err(Error::Empty("gp_sample needs at least one point"));
    }
    if !(noise_sd >= 0.0) || !noise_sd.is_finite() {
        return Err(Error::param("noise standard deviation must be finite and >= 0"));
    }
    let mut cov = gram_matrix(points, kernel);
    if cov.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("Gram matrix has non-finite entries"));
    }
    for i in 0..cov.nrows() {
        cov[(i, i)] += noise_sd * noise_sd;
    }
    let (l, _) = cholesky_with_jitter(&cov, &JitterSchedule::default())?;
    let z = DVector::from_fn(points.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
    Ok((l * z).iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    #[test]
    fn single_point_has_unit_variance() {
        let k = KernelSpec::isotropic(10.0, 2, 0, 0).unwrap();
        let mut rng = SeededRng::new(1).stream();
        let n = 10_000;
        let draws: Vec<f64> = (0..n)
            .map(|_| gp_sample(&[vec![0.3, 0.3]], &k, 0.0, &mut rng).unwrap()[0])
            .collect();
        let var = draws.iter().map(|v| v * v).sum::<f64>() / n as f64;
        // Var of the sample variance of N(0,1) is 2/n.
        assert!((var - 1.0).abs() < 3.0 * (2.0 / n as f64).sqrt(), "{var}");
    }

    #[test]
    fn duplicated_points_get_equal_targets() {
        let k = KernelSpec::laplace(1.0).unwrap();
        let mut rng = SeededRng::new(2).stream();
        for _ in 0..100 {
            let y = gp_sample(&[vec![0.5, 0.5], vec![0.5, 0.5]], &k, 0.0, &mut rng).unwrap();
            assert!((y[0] - y[1]).abs() <= 1e-3);
        }
    }

    #[test]
    fn empirical_covariance_matches_kernel() {
        let k = KernelSpec::isotropic(2.0, 2, 0, 0).unwrap();
        let pts: Vec<Vec<f64>> = (0..50)
            .map(|i| vec![(i % 10) as f64 / 9.0, (i / 10) as f64 / 4.0])
            .collect();
        let gram = gram_matrix(&pts, &k);
        let mut rng = SeededRng::new(3).stream();
        let draws = 500;
        let mut acc = DMatrix::<f64>::zeros(50, 50);
        for _ in 0..draws {
            let y = DVector::from_vec(gp_sample(&pts, &k, 0.0, &mut rng).unwrap());
            acc += &y * y.transpose();
        }
        acc /= draws as f64;
        for i in 0..50 {
            for j in 0..50 {
                // Var(y_i y_j) = K_ii K_jj + K_ij^2 for a centered Gaussian pair.
                let var = gram[(i, i)] * gram[(j, j)] + gram[(i, j)].powi(2);
                let se = (var / draws as f64).sqrt();
                assert!(
                    (acc[(i, j)] - gram[(i, j)]).abs() <= 4.0 * se + 1e-9,
                    "({i},{j}) {} vs {}",
                    acc[(i, j)],
                    gram[(i, j)]
                );
            }
        }
    }

    #[test]
    fn impossible_covariance_reports_conditioning() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let err = cholesky_with_jitter(&cov, &JitterSchedule::default()).unwrap_err();
        assert!(matches!(err, Error::Cholesky { min_diagonal, .. } if min_diagonal == -1.0));
    }
}
