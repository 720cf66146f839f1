//! Regression error against feature count and against CPU time.

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::svg::{Plot, Series};
use super::{check_count, median, process_cpu_seconds, Output, RunOptions};
use crate::dataset::{load_csv, Dataset};
use crate::error::{Error, Result};
use crate::features::{FeatureMap, Features, Method};
use crate::geometry::bounding_box;
use crate::regression::{
    bandwidth_search_with, evaluate, lifetime_sweep_with, ridge_exact, RidgeConfig, SearchConfig, SweepConfig,
};
use crate::rng::SeededRng;

/// Upper coordinate bounds of the stand-in data: `1e4` except columns
/// 3 and 20 (`1e5`) and 8, 9 and 21 (`1e7`), 1-based.
fn stand_in_ranges() -> Vec<f64> {
    (1..=21)
        .map(|n| match n {
            3 | 20 => 1e5,
            8 | 9 | 21 => 1e7,
            _ => 1e4,
        })
        .collect()
}

/// Synthetic 21-dimensional regression data with coordinates skewed
/// towards 0 over very different ranges, and a target that varies on the
/// scale `1e6` of the widest coordinates.
pub fn cpu_like_dataset(rows: usize, rng: &SeededRng) -> Result<Dataset> {
    check_count("rows", rows)?;
    let ranges = stand_in_ranges();
    let mut s = rng.stream();
    let mut points = Vec::with_capacity(rows);
    let mut targets = Vec::with_capacity(rows);
    for _ in 0..rows {
        let x: Vec<f64> = ranges.iter().map(|r| r * s.gen::<f64>().powi(3)).collect();
        let noise: f64 = s.sample(StandardNormal);
        let y = 10.0 * (x[7] / 1e6).sin() + 8.0 * (-x[8] / 2e6).exp() - 6.0 * (x[20] / 1e6).tanh()
            + 3.0 * x[2] / 1e5
            + 0.5 * noise;
        targets.push(y);
        points.push(x);
    }
    let mut columns: Vec<String> = (1..=21).map(|n| format!("x{n}")).collect();
    columns.push("y".into());
    Ok(Dataset::new(points, Some(targets))?.with_columns(columns))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressConfig {
    /// CSV input; a synthetic stand-in is generated when absent.
    pub input: Option<PathBuf>,
    pub target: Option<String>,
    pub synthetic_rows: usize,
    pub methods: Vec<Method>,
    /// Feature counts of the error-versus-features curves.
    pub feature_counts: Vec<usize>,
    pub repeats: usize,
    /// Lifetime per method for the error-versus-features curves.
    pub lifetimes: BTreeMap<Method, f64>,
    /// Components used in the timed runs.
    pub timing_features: usize,
    /// Evaluations of the Fourier and binning bandwidth search.
    pub search_budget: usize,
    /// Lifetime range of the timed runs; defaults to `[0.1, 100] / L`
    /// where `L` is the L1 diameter of the training bounding box.
    pub lifetime_range: Option<(f64, f64)>,
    pub max_evaluations: usize,
    pub ridge: f64,
    pub feature_curves: bool,
    pub timing: bool,
}

impl Default for RegressConfig {
    fn default() -> Self {
        Self {
            input: None,
            target: None,
            synthetic_rows: 600,
            methods: Method::ALL.to_vec(),
            feature_counts: vec![1, 2, 3, 5, 8, 13, 21, 34, 50],
            repeats: 5,
            lifetimes: BTreeMap::from([
                (Method::Fourier, 1e-6),
                (Method::Binning, 1e-6),
                (Method::Mondrian, 1e-6),
                (Method::RotatedMondrian, 2.5e-7),
            ]),
            timing_features: 350,
            search_budget: 12,
            lifetime_range: None,
            max_evaluations: 200,
            ridge: crate::regression::DEFAULT_RIDGE,
            feature_curves: true,
            timing: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub method: Method,
    #[serde(rename = "M")]
    pub m: usize,
    pub repeat: usize,
    /// Feature columns active on some training row (`M` for Fourier).
    pub nonzero_features: usize,
    pub validation_error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub method: Method,
    pub step: usize,
    pub lambda: f64,
    pub validation_error: f64,
    pub best_validation_error: f64,
    /// CPU seconds since the method's run started; not reproducible.
    pub cpu_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodCurve {
    pub method: Method,
    pub feature_counts: Vec<usize>,
    pub median_validation_error: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimedResult {
    pub method: Method,
    pub lifetime: f64,
    pub validation_error: f64,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressSummary {
    pub rows: [usize; 3],
    pub curves: Vec<MethodCurve>,
    pub timed: Vec<TimedResult>,
}

fn method_label(m: Method) -> u64 {
    Method::ALL.iter().position(|&x| x == m).expect("known method") as u64
}

fn load_splits(config: &RegressConfig, root: &SeededRng) -> Result<[Dataset; 3]> {
    let data = match &config.input {
        Some(path) => {
            let target = config
                .target
                .as_deref()
                .ok_or_else(|| Error::param("--target is required with --input"))?;
            load_csv(path, Some(target))?
        }
        None => cpu_like_dataset(config.synthetic_rows, &root.derive(0))?,
    };
    data.require_targets()?;
    let mut parts = data.split(&[0.6, 0.2, 0.2], &root.derive(3))?.into_iter();
    let mut next = || parts.next().ok_or(Error::Empty("dataset split"));
    Ok([next()?, next()?, next()?])
}

fn nonzero_features(z: &Features, rows: usize) -> usize {
    match z {
        Features::Sparse(s) => s.nonzero_features(&(0..rows).collect::<Vec<_>>()),
        Features::Dense(d) => d.ncols(),
    }
}

/// Validation RMSE against the number of components, per method and repeat.
///
/// Each repeat draws one map with the largest count from `seed/1/k/r` and
/// evaluates its prefixes, which are maps with fewer components.
pub fn run_feature_curves(config: &RegressConfig, seed: u64) -> Result<Vec<FeatureRow>> {
    check_count("repeats", config.repeats)?;
    let root = SeededRng::new(seed);
    let [train, validation, _] = load_splits(config, &root)?;
    let max_m = *config
        .feature_counts
        .iter()
        .max()
        .ok_or(Error::Empty("feature counts"))?;
    if config.feature_counts.contains(&0) {
        return Err(Error::param("feature counts must be positive"));
    }
    let all: Vec<&[f64]> = train
        .points()
        .iter()
        .chain(validation.points())
        .map(|p| p.as_slice())
        .collect();
    let nt = train.len();
    let train_rows: Vec<usize> = (0..nt).collect();
    let val_rows: Vec<usize> = (nt..all.len()).collect();
    let (ytr, yva) = (train.require_targets()?, validation.require_targets()?);

    let mut rows = Vec::new();
    for &method in &config.methods {
        let lifetime = *config
            .lifetimes
            .get(&method)
            .ok_or_else(|| Error::param(format!("no lifetime configured for `{method}`")))?;
        for repeat in 0..config.repeats {
            let rng = root.derive(1).derive(method_label(method)).derive(repeat as u64);
            let map = FeatureMap::build(&all, method, max_m, lifetime, &rng)?;
            for &m in &config.feature_counts {
                let z = map.truncated(m)?.featurize(&all, lifetime)?;
                let (zt, zv) = (z.select_rows(&train_rows), z.select_rows(&val_rows));
                let w = ridge_exact(&zt, ytr, config.ridge)?;
                rows.push(FeatureRow {
                    method,
                    m,
                    repeat,
                    nonzero_features: nonzero_features(&zt, nt),
                    validation_error: evaluate(&w, &zv, yva)?.rmse,
                });
            }
        }
    }
    Ok(rows)
}

/// Validation RMSE trajectory while each method selects its lifetime:
/// lifetime sweep for partition methods, bandwidth search otherwise.
/// Method `k` draws from `seed/2/k`.
pub fn run_timing(config: &RegressConfig, seed: u64) -> Result<Vec<TimingRow>> {
    check_count("timing_features", config.timing_features)?;
    let root = SeededRng::new(seed);
    let [train, validation, test] = load_splits(config, &root)?;
    let (lo, hi) = match config.lifetime_range {
        Some(r) => r,
        None => {
            let diameter = bounding_box(train.points())?.linear_dimension();
            if !(diameter > 0.0) {
                return Err(Error::param("training points are all identical"));
            }
            (0.1 / diameter, 100.0 / diameter)
        }
    };
    let ridge = RidgeConfig::exact(config.ridge);
    let mut rows = Vec::new();
    for &method in &config.methods {
        let rng = root.derive(2).derive(method_label(method));
        let start = process_cpu_seconds();
        let mut best = f64::INFINITY;
        let mut record = |lambda: f64, err: f64, rows: &mut Vec<TimingRow>| {
            best = best.min(err);
            rows.push(TimingRow {
                method,
                step: rows.iter().filter(|r| r.method == method).count(),
                lambda,
                validation_error: err,
                best_validation_error: best,
                cpu_seconds: process_cpu_seconds() - start,
            });
        };
        if method.is_partition() {
            let sweep = SweepConfig {
                ridge: ridge.clone(),
                max_evaluations: config.max_evaluations,
                ..SweepConfig::new(method, config.timing_features, hi)
            };
            lifetime_sweep_with(&train, &validation, &test, &sweep, &rng, |p| {
                record(p.lifetime, p.validation.rmse, &mut rows)
            })?;
        } else {
            let search = SearchConfig {
                lower: lo,
                upper: hi,
                budget: config.search_budget,
            };
            bandwidth_search_with(
                method,
                &train,
                &validation,
                config.timing_features,
                &ridge,
                &search,
                &rng,
                |p| record(p.lifetime, p.value, &mut rows),
            )?;
        }
    }
    Ok(rows)
}

/// Runs the enabled parts and writes `regress_features.csv`,
/// `regress_time.csv`, `regress.json` and the two plots.
pub fn regress(config: &RegressConfig, options: &RunOptions) -> Result<RegressSummary> {
    let root = SeededRng::new(options.seed);
    let splits = load_splits(config, &root)?;
    let mut out = Output::new("regress", config, options)?;
    let mut summary = RegressSummary {
        rows: [splits[0].len(), splits[1].len(), splits[2].len()],
        curves: Vec::new(),
        timed: Vec::new(),
    };
    if config.feature_curves {
        let rows = run_feature_curves(config, options.seed)?;
        out.write_csv("regress_features.csv", &rows)?;
        for &method in &config.methods {
            let mut counts = config.feature_counts.clone();
            counts.sort_unstable();
            counts.dedup();
            let med = counts
                .iter()
                .map(|&m| {
                    let v: Vec<f64> = rows
                        .iter()
                        .filter(|r| r.method == method && r.m == m)
                        .map(|r| r.validation_error)
                        .collect();
                    median(&v)
                })
                .collect();
            summary.curves.push(MethodCurve {
                method,
                feature_counts: counts,
                median_validation_error: med,
            });
        }
        let plot = Plot {
            title: "Validation error versus number of components".into(),
            x_label: "M".into(),
            y_label: "median validation RMSE".into(),
            series: summary
                .curves
                .iter()
                .map(|c| {
                    let pts = c
                        .feature_counts
                        .iter()
                        .zip(&c.median_validation_error)
                        .map(|(&m, &e)| (m as f64, e));
                    Series::new(c.method.name(), pts.collect())
                })
                .collect(),
            ..Plot::default()
        };
        out.write_svg("regress_features.svg", &plot)?;
    }
    if config.timing {
        let rows = run_timing(config, options.seed)?;
        out.write_csv("regress_time.csv", &rows)?;
        for &method in &config.methods {
            let mine: Vec<&TimingRow> = rows.iter().filter(|r| r.method == method).collect();
            if let Some(best) = mine
                .iter()
                .copied()
                .reduce(|a, b| if b.validation_error < a.validation_error { b } else { a })
            {
                summary.timed.push(TimedResult {
                    method,
                    lifetime: best.lambda,
                    validation_error: best.validation_error,
                    steps: mine.len(),
                });
            }
        }
        let plot = Plot {
            title: "Validation error versus CPU time".into(),
            x_label: "CPU seconds".into(),
            y_label: "best validation RMSE so far".into(),
            series: config
                .methods
                .iter()
                .map(|&m| {
                    let pts = rows
                        .iter()
                        .filter(|r| r.method == m)
                        .map(|r| (r.cpu_seconds, r.best_validation_error));
                    Series::new(m.name(), pts.collect())
                })
                .collect(),
            ..Plot::default()
        };
        out.write_svg("regress_time.svg", &plot)?;
    }
    out.write_json("regress.json", &summary)?;
    Ok(summary)
}
