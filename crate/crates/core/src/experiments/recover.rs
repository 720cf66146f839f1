//! Recovering the lifetime of a Gaussian process by a lifetime sweep.

use serde::{Deserialize, Serialize};

use super::svg::{Plot, Series};
use super::{check_count, check_positive, uniform_points, Output, RunOptions};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::features::Method;
use crate::kernels::{gp_sample, IsotropicLimit, KernelSpec};
use crate::regression::{lifetime_sweep, ErrorMetric, RidgeConfig, SweepConfig, SweepPoint, SweepResult};
use crate::rng::SeededRng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoverConfig {
    pub n_per_split: usize,
    pub dim: usize,
    /// Lifetime of the isotropic kernel generating the data.
    pub true_lifetime: f64,
    pub lifetime_max: f64,
    pub features: usize,
    pub noise_sd: f64,
    pub max_evaluations: usize,
    pub ridge: f64,
    pub limit_samples: usize,
}

impl Default for RecoverConfig {
    fn default() -> Self {
        Self {
            n_per_split: 150,
            dim: 2,
            true_lifetime: 10.0,
            lifetime_max: 30.0,
            features: 50,
            noise_sd: 0.1,
            max_evaluations: 200,
            ridge: crate::regression::DEFAULT_RIDGE,
            limit_samples: 20_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoverSummary {
    pub true_lifetime: f64,
    pub lifetime_hat: f64,
    pub best: SweepPoint,
    pub n_evaluations: usize,
}

/// Generates train/validation/test splits from a Gaussian process with the
/// isotropic limit kernel and sweeps rotated-Mondrian lifetimes on them.
///
/// Points come from `seed/0`, the process draw from `seed/1` and the sweep
/// from `seed/2`.
pub fn run_recover(config: &RecoverConfig, seed: u64) -> Result<SweepResult> {
    check_count("n_per_split", config.n_per_split)?;
    check_count("features", config.features)?;
    check_positive("true_lifetime", config.true_lifetime)?;
    check_positive("ridge", config.ridge)?;
    if !(config.lifetime_max > config.true_lifetime) {
        return Err(Error::param("lifetime_max must exceed the true lifetime"));
    }
    if !(config.noise_sd >= 0.0) {
        return Err(Error::param("noise_sd must be nonnegative"));
    }
    let root = SeededRng::new(seed);
    let n = config.n_per_split;
    let points = uniform_points(3 * n, config.dim, &mut root.derive(0).stream());
    let kernel = KernelSpec::IsotropicLimit(IsotropicLimit::auto(
        config.true_lifetime,
        config.dim,
        config.limit_samples,
        seed,
    )?);
    let y = gp_sample(&points, &kernel, config.noise_sd, &mut root.derive(1).stream())?;
    let split = |k: usize| {
        Dataset::new(
            points[k * n..(k + 1) * n].to_vec(),
            Some(y[k * n..(k + 1) * n].to_vec()),
        )
    };
    let (train, validation, test) = (split(0)?, split(1)?, split(2)?);
    let sweep = SweepConfig {
        ridge: RidgeConfig::exact(config.ridge),
        max_evaluations: config.max_evaluations,
        ..SweepConfig::new(Method::RotatedMondrian, config.features, config.lifetime_max)
    };
    lifetime_sweep(&train, &validation, &test, &sweep, &root.derive(2))
}

/// Runs [`run_recover`] and writes `recover.csv` (RMSE per split),
/// `recover.json` and `recover.svg`.
pub fn recover(config: &RecoverConfig, options: &RunOptions) -> Result<RecoverSummary> {
    let result = run_recover(config, options.seed)?;
    let mut out = Output::new("recover", config, options)?;
    let mut csv = Vec::new();
    result.write_csv(&mut csv, ErrorMetric::Rmse)?;
    out.write("recover.csv", &csv)?;
    let summary = RecoverSummary {
        true_lifetime: config.true_lifetime,
        lifetime_hat: result.lifetime_hat(),
        best: *result.best_point(),
        n_evaluations: result.points.len(),
    };
    out.write_json("recover.json", &summary)?;
    let curve = |f: fn(&SweepPoint) -> f64| result.points.iter().map(|p| (p.lifetime, f(p))).collect::<Vec<_>>();
    let plot = Plot {
        title: format!("Errors versus lifetime (true lifetime {})", config.true_lifetime),
        x_label: "lifetime".into(),
        y_label: "RMSE".into(),
        log_x: true,
        series: vec![
            Series::new("train", curve(|p| p.train.rmse)),
            Series::new("validation", curve(|p| p.validation.rmse)),
            Series::new("test", curve(|p| p.test.rmse)),
        ],
        ..Plot::default()
    };
    out.write_svg("recover.svg", &plot)?;
    Ok(summary)
}
