//! Partition kernels on a thin rotated slab ("Mondrian line").
//!
//! Points are uniform on `[0, 1] x [-eps, eps]^2`, labelled 1 when the last
//! two coordinates share a sign, then rotated so that `e_1` points along a
//! chosen direction. Axis-aligned cuts fit such data poorly.

use serde::{Deserialize, Serialize};

use super::svg::{Plot, Series};
use super::{check_count, check_positive, Output, RunOptions};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::features::Method;
use crate::regression::{lifetime_sweep, RidgeConfig, SweepConfig, SweepResult};
use crate::rng::SeededRng;
use crate::rotation::Rotation;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MondrianLineSpec {
    pub n_per_split: usize,
    pub eps: f64,
    /// Image of `e_1`; normalized on use.
    pub direction: Vec<f64>,
}

impl Default for MondrianLineSpec {
    fn default() -> Self {
        Self {
            n_per_split: 500,
            eps: 0.01,
            direction: vec![1.0, 1.0, 1.0],
        }
    }
}

/// Label of an unrotated point: 1 on `[0,1] x [0,eps]^2` and
/// `[0,1] x [-eps,0]^2`, 0 elsewhere.
pub fn mondrian_line_label(point: &[f64]) -> f64 {
    let (y, z) = (point[1], point[2]);
    ((y >= 0.0 && z >= 0.0) || (y < 0.0 && z < 0.0)) as u8 as f64
}

/// Train, validation and test splits of `spec.n_per_split` points each,
/// drawn from `rng.stream()`.
pub fn mondrian_line_dataset(spec: &MondrianLineSpec, rng: &SeededRng) -> Result<[Dataset; 3]> {
    check_count("n_per_split", spec.n_per_split)?;
    check_positive("eps", spec.eps)?;
    if spec.direction.len() != 3 {
        return Err(Error::ShapeMismatch(
            "the line direction must have 3 coordinates".into(),
        ));
    }
    let norm = spec.direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::param("the line direction must be nonzero"));
    }
    let dir: Vec<f64> = spec.direction.iter().map(|v| v / norm).collect();
    let rotation = Rotation::aligning_first_axis(&dir)?;
    let mut s = rng.stream();
    let mut split = || {
        let mut points = Vec::with_capacity(spec.n_per_split);
        let mut labels = Vec::with_capacity(spec.n_per_split);
        for _ in 0..spec.n_per_split {
            let raw = [
                rand::Rng::gen::<f64>(&mut s),
                spec.eps * (2.0 * rand::Rng::gen::<f64>(&mut s) - 1.0),
                spec.eps * (2.0 * rand::Rng::gen::<f64>(&mut s) - 1.0),
            ];
            labels.push(mondrian_line_label(&raw));
            points.push(rotation.apply(&raw));
        }
        Dataset::new(points, Some(labels))
    };
    Ok([split()?, split()?, split()?])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MondrianLineConfig {
    pub spec: MondrianLineSpec,
    pub features: usize,
    pub lifetime_max: f64,
    pub max_evaluations: usize,
    pub ridge: f64,
}

impl Default for MondrianLineConfig {
    fn default() -> Self {
        Self {
            spec: MondrianLineSpec::default(),
            features: 500,
            lifetime_max: 1000.0,
            max_evaluations: 60,
            ridge: crate::regression::DEFAULT_RIDGE,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LineRow {
    pub method: Method,
    pub lambda: f64,
    pub split: &'static str,
    pub relative_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineMethodSummary {
    pub method: Method,
    /// Lifetime with the smallest validation error.
    pub lifetime_hat: f64,
    pub train_relative_error: f64,
    pub validation_relative_error: f64,
    pub test_relative_error: f64,
}

impl LineMethodSummary {
    fn from_sweep(r: &SweepResult) -> Self {
        let b = r.best_point();
        Self {
            method: r.method,
            lifetime_hat: b.lifetime,
            train_relative_error: b.train.relative_error,
            validation_relative_error: b.validation.relative_error,
            test_relative_error: b.test.relative_error,
        }
    }
}

/// Sweeps both partition methods on one Mondrian-line sample.
///
/// Data come from `seed/0`; the sweep of method `k` (position in
/// [`Method::ALL`]) from `seed/1/k`.
pub fn run_mondrian_line(config: &MondrianLineConfig, seed: u64) -> Result<Vec<SweepResult>> {
    check_count("features", config.features)?;
    check_positive("lifetime_max", config.lifetime_max)?;
    let root = SeededRng::new(seed);
    let [train, validation, test] = mondrian_line_dataset(&config.spec, &root.derive(0))?;
    [Method::Mondrian, Method::RotatedMondrian]
        .into_iter()
        .map(|method| {
            let label = Method::ALL.iter().position(|&m| m == method).expect("known method") as u64;
            let sweep = SweepConfig {
                ridge: RidgeConfig::exact(config.ridge),
                max_evaluations: config.max_evaluations,
                ..SweepConfig::new(method, config.features, config.lifetime_max)
            };
            lifetime_sweep(&train, &validation, &test, &sweep, &root.derive(1).derive(label))
        })
        .collect()
}

/// Runs [`run_mondrian_line`] and writes `mondrian_line.csv`,
/// `mondrian_line.json` and `mondrian_line.svg`.
pub fn mondrian_line(config: &MondrianLineConfig, options: &RunOptions) -> Result<Vec<LineMethodSummary>> {
    let sweeps = run_mondrian_line(config, options.seed)?;
    let mut out = Output::new("mondrian-line", config, options)?;
    let mut rows = Vec::new();
    for r in &sweeps {
        for p in &r.points {
            for (split, m) in [("train", p.train), ("validation", p.validation), ("test", p.test)] {
                rows.push(LineRow {
                    method: r.method,
                    lambda: p.lifetime,
                    split,
                    relative_error: m.relative_error,
                });
            }
        }
    }
    out.write_csv("mondrian_line.csv", &rows)?;
    let summary: Vec<LineMethodSummary> = sweeps.iter().map(LineMethodSummary::from_sweep).collect();
    out.write_json("mondrian_line.json", &summary)?;
    let mut series = Vec::new();
    for r in &sweeps {
        series.push(Series::new(
            format!("{} train", r.method),
            r.points.iter().map(|p| (p.lifetime, p.train.relative_error)).collect(),
        ));
        series.push(Series::new(
            format!("{} test", r.method),
            r.points.iter().map(|p| (p.lifetime, p.test.relative_error)).collect(),
        ));
    }
    let plot = Plot {
        title: "Relative error versus lifetime".into(),
        x_label: "lifetime".into(),
        y_label: "relative error".into(),
        log_x: true,
        series,
        ..Plot::default()
    };
    out.write_svg("mondrian_line.svg", &plot)?;
    Ok(summary)
}
