//! Convergence of order-`M` kernel estimates to their limits.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::svg::{Plot, Series};
use super::{check_count, check_positive, median, uniform_points, Output, RunOptions};
use crate::error::Result;
use crate::features::{FeatureMap, Method};
use crate::kernels::{laplace_kernel, IsotropicLimit};
use crate::rng::SeededRng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergeConfig {
    pub methods: Vec<Method>,
    pub n_points: usize,
    pub dim: usize,
    pub lifetime: f64,
    pub max_features: usize,
    pub repeats: usize,
    /// Monte Carlo directions for the isotropic limit when `dim >= 3`.
    pub limit_samples: usize,
}

impl Default for ConvergeConfig {
    fn default() -> Self {
        Self {
            methods: Method::ALL.to_vec(),
            n_points: 100,
            dim: 2,
            lifetime: 10.0,
            max_features: 50,
            repeats: 5,
            limit_samples: 20_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergeRow {
    pub method: Method,
    #[serde(rename = "M")]
    pub m: usize,
    pub repeat: usize,
    pub max_error: f64,
}

fn method_label(m: Method) -> u64 {
    Method::ALL.iter().position(|&x| x == m).expect("known method") as u64
}

/// Maximum error over all distinct pairs for `M = 1..=max_features`,
/// for every method and repeat.
///
/// Points come from `seed/0`; the map of method `k` in repeat `r` from
/// `seed/1/k/r`, where `k` is the method's position in [`Method::ALL`].
pub fn run_converge(config: &ConvergeConfig, seed: u64) -> Result<Vec<ConvergeRow>> {
    check_count("n_points", config.n_points)?;
    check_count("dim", config.dim)?;
    check_count("max_features", config.max_features)?;
    check_count("repeats", config.repeats)?;
    check_positive("lifetime", config.lifetime)?;
    let root = SeededRng::new(seed);
    let points = uniform_points(config.n_points, config.dim, &mut root.derive(0).stream());
    let n = points.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();

    let laplace: Vec<f64> = pairs
        .iter()
        .map(|&(i, j)| laplace_kernel(&points[i], &points[j], config.lifetime))
        .collect();
    let isotropic = if config.methods.contains(&Method::RotatedMondrian) {
        let k = IsotropicLimit::auto(config.lifetime, config.dim, config.limit_samples, seed)?;
        pairs
            .iter()
            .map(|&(i, j)| k.eval(crate::kernels::l2_distance(&points[i], &points[j])))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };

    let mut rows = Vec::new();
    for &method in &config.methods {
        let limit = if method == Method::RotatedMondrian {
            &isotropic
        } else {
            &laplace
        };
        for repeat in 0..config.repeats {
            let rng = root.derive(1).derive(method_label(method)).derive(repeat as u64);
            let map = FeatureMap::build(&points, method, config.max_features, config.lifetime, &rng)?;
            let terms = map.component_terms(&points, config.lifetime)?;
            let mut sums = vec![0.0; pairs.len()];
            for m in 0..config.max_features {
                let mut worst = 0.0f64;
                for (p, &(i, j)) in pairs.iter().enumerate() {
                    sums[p] += terms.term(m, i, j);
                    worst = worst.max((sums[p] / (m + 1) as f64 - limit[p]).abs());
                }
                rows.push(ConvergeRow {
                    method,
                    m: m + 1,
                    repeat,
                    max_error: worst,
                });
            }
        }
    }
    Ok(rows)
}

/// Median over repeats of the maximum error, indexed by `M - 1`.
pub fn median_by_features(rows: &[ConvergeRow], method: Method) -> Vec<f64> {
    let mut by_m: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.method == method) {
        by_m.entry(r.m).or_default().push(r.max_error);
    }
    by_m.values().map(|v| median(v)).collect()
}

#[derive(Serialize)]
struct Summary {
    method: Method,
    median_max_error: Vec<f64>,
}

/// Runs [`run_converge`] and writes `converge.csv`, `converge.json` and
/// `converge.svg`.
pub fn converge(config: &ConvergeConfig, options: &RunOptions) -> Result<Vec<ConvergeRow>> {
    let rows = run_converge(config, options.seed)?;
    let mut out = Output::new("converge", config, options)?;
    out.write_csv("converge.csv", &rows)?;
    let summary: Vec<Summary> = config
        .methods
        .iter()
        .map(|&method| Summary {
            method,
            median_max_error: median_by_features(&rows, method),
        })
        .collect();
    out.write_json("converge.json", &summary)?;
    let plot = Plot {
        title: "Maximum kernel error versus number of components".into(),
        x_label: "M".into(),
        y_label: "median max |k_M - k|".into(),
        log_y: true,
        series: summary
            .iter()
            .map(|s| {
                let pts = s
                    .median_max_error
                    .iter()
                    .enumerate()
                    .map(|(i, &e)| ((i + 1) as f64, e))
                    .collect();
                Series::new(s.method.name(), pts)
            })
            .collect(),
        ..Plot::default()
    };
    out.write_svg("converge.svg", &plot)?;
    Ok(rows)
}
