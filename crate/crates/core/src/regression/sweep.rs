//! Validation-driven lifetime selection for Mondrian-type feature maps.
//!
//! Trees are generated once up to `lifetime_max`. Because the partition at
//! lifetime `t` is the tree with every cut later than `t` removed, the whole
//! error curve can be read off one set of trees: errors only change at cut
//! times, so those are the evaluation lifetimes.
//!
//! The exact solver tracks, for every (row, training row) pair, the number
//! of components in which the two share a cell. The count starts at `M`
//! and each cut, processed in time order, decrements the pairs it
//! separates. Kernel ridge in dual form on these counts is identical to
//! primal ridge on the one-hot features.

use std::collections::HashMap;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{metrics, ridge_sgd_from, solve_spd, Metrics, RidgeConfig, Solver};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::features::{FeatureMap, Method, PartitionComponent};
use crate::rng::SeededRng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub method: Method,
    pub n_components: usize,
    pub lifetime_max: f64,
    pub ridge: RidgeConfig,
    /// Upper bound on the number of evaluation lifetimes.
    pub max_evaluations: usize,
    /// SGD only: start each lifetime from the previous weights (cells that
    /// survive keep theirs, new cells start at 0) instead of from 0.
    pub warm_start: bool,
}

impl SweepConfig {
    pub fn new(method: Method, n_components: usize, lifetime_max: f64) -> Self {
        Self {
            method,
            n_components,
            lifetime_max,
            ridge: RidgeConfig::default(),
            max_evaluations: 200,
            warm_start: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub lifetime: f64,
    /// Total number of cells over all components.
    pub n_features: usize,
    pub train: Metrics,
    pub validation: Metrics,
    pub test: Metrics,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorMetric {
    Rmse,
    Relative,
}

impl ErrorMetric {
    pub fn of(self, m: &Metrics) -> f64 {
        match self {
            ErrorMetric::Rmse => m.rmse,
            ErrorMetric::Relative => m.relative_error,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub method: Method,
    pub n_components: usize,
    pub lifetime_max: f64,
    /// Ascending in lifetime.
    pub points: Vec<SweepPoint>,
    /// Index into `points` of the smallest validation error (earliest on ties).
    pub best: usize,
}

impl SweepResult {
    fn from_points(config: &SweepConfig, points: Vec<SweepPoint>) -> Self {
        let mut best = 0;
        for (i, p) in points.iter().enumerate() {
            if p.validation.rmse < points[best].validation.rmse {
                best = i;
            }
        }
        Self {
            method: config.method,
            n_components: config.n_components,
            lifetime_max: config.lifetime_max,
            points,
            best,
        }
    }

    pub fn best_point(&self) -> &SweepPoint {
        &self.points[self.best]
    }

    /// Lifetime with the smallest validation error.
    pub fn lifetime_hat(&self) -> f64 {
        self.best_point().lifetime
    }

    /// Columns `lambda,train,validation,test`.
    pub fn write_csv<W: Write>(&self, writer: W, metric: ErrorMetric) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["lambda", "train", "validation", "test"])?;
        for p in &self.points {
            w.write_record([
                p.lifetime.to_string(),
                metric.of(&p.train).to_string(),
                metric.of(&p.validation).to_string(),
                metric.of(&p.test).to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Lifetimes at which a sweep evaluates: the cut times up to
/// `lifetime_max` plus `lifetime_max` itself.
///
/// When there are more than `max_count`, a geometric grid from the first
/// cut time to `lifetime_max` is snapped down to the nearest cut time,
/// which leaves the partition at each grid point unchanged.
pub fn evaluation_lifetimes(cut_times: &[f64], lifetime_max: f64, max_count: usize) -> Result<Vec<f64>> {
    if max_count == 0 {
        return Err(Error::param("at least one evaluation lifetime is required"));
    }
    let mut times: Vec<f64> = cut_times.iter().copied().filter(|&t| t <= lifetime_max).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    if times.last() != Some(&lifetime_max) {
        times.push(lifetime_max);
    }
    if times.len() <= max_count {
        return Ok(times);
    }
    if max_count == 1 {
        return Ok(vec![lifetime_max]);
    }
    let first = times[0];
    let ratio = lifetime_max / first;
    let mut out: Vec<f64> = (0..max_count)
        .map(|k| {
            let target = first * ratio.powf(k as f64 / (max_count - 1) as f64);
            let idx = times.partition_point(|&t| t <= target).max(1) - 1;
            times[idx]
        })
        .collect();
    *out.last_mut().unwrap() = lifetime_max;
    out.dedup();
    Ok(out)
}

/// Sweeps the lifetime of a partition feature map; see the module docs.
pub fn lifetime_sweep(
    train: &Dataset,
    validation: &Dataset,
    test: &Dataset,
    config: &SweepConfig,
    rng: &SeededRng,
) -> Result<SweepResult> {
    lifetime_sweep_with(train, validation, test, config, rng, |_| {})
}

/// As [`lifetime_sweep`], calling `observe` after each evaluation.
///
/// The feature map is drawn from `rng.derive(0)`; the SGD solver (if any)
/// shuffles with `rng.derive(1)`.
pub fn lifetime_sweep_with<F: FnMut(&SweepPoint)>(
    train: &Dataset,
    validation: &Dataset,
    test: &Dataset,
    config: &SweepConfig,
    rng: &SeededRng,
    mut observe: F,
) -> Result<SweepResult> {
    if !config.method.is_partition() {
        return Err(Error::Unsupported(format!(
            "lifetime sweep needs a partition method, got `{}`",
            config.method
        )));
    }
    config.ridge.validate()?;
    if !(config.lifetime_max > 0.0) {
        return Err(Error::param("lifetime_max must be positive"));
    }
    let targets: Vec<&[f64]> = [train, validation, test]
        .iter()
        .map(|d| d.require_targets())
        .collect::<Result<_>>()?;
    let all: Vec<&[f64]> = [train, validation, test]
        .iter()
        .flat_map(|d| d.points().iter().map(|p| p.as_slice()))
        .collect();
    let map = FeatureMap::build_with_horizon(
        &all,
        config.method,
        config.n_components,
        config.lifetime_max,
        config.lifetime_max,
        &rng.derive(0),
    )?;
    let comps = map.partition_components().expect("partition method");
    let cuts: Vec<f64> = comps.iter().flat_map(|c| c.tree().cut_times()).collect();
    let lifetimes = evaluation_lifetimes(&cuts, config.lifetime_max, config.max_evaluations)?;
    let sizes = [train.len(), validation.len(), test.len()];

    let mut points = Vec::with_capacity(lifetimes.len());
    match &config.ridge.solver {
        Solver::Exact => {
            let mut counts = SharedCells::new(&all, comps, train.len());
            for &t in &lifetimes {
                counts.advance_to(t);
                let predictions = counts.dual_fit(config.ridge.ridge, targets[0])?;
                let p = point_from_predictions(t, map_cells(comps, t), &predictions, &targets, sizes)?;
                observe(&p);
                points.push(p);
            }
        }
        Solver::Sgd(sgd) => {
            let mut stream = rng.derive(1).stream();
            let mut previous: HashMap<(usize, usize), f64> = HashMap::new();
            let train_rows: Vec<usize> = (0..train.len()).collect();
            for &t in &lifetimes {
                let z = map.featurize(&all, t)?;
                let keys = feature_keys(comps, t);
                let init: Vec<f64> = keys.iter().map(|k| previous.get(k).copied().unwrap_or(0.0)).collect();
                let fit = ridge_sgd_from(
                    &z.select_rows(&train_rows),
                    targets[0],
                    config.ridge.ridge,
                    sgd,
                    init,
                    &mut stream,
                )?;
                let predictions = z.mul(&fit.weights);
                if config.warm_start {
                    previous = keys.into_iter().zip(fit.weights).collect();
                }
                let p = point_from_predictions(t, z.n_cols(), &predictions, &targets, sizes)?;
                observe(&p);
                points.push(p);
            }
        }
    }
    Ok(SweepResult::from_points(config, points))
}

fn map_cells(comps: &[PartitionComponent], lifetime: f64) -> usize {
    comps.iter().map(|c| c.tree().n_cells(lifetime)).sum()
}

/// `(component, leaf node)` of every feature column at `lifetime`.
fn feature_keys(comps: &[PartitionComponent], lifetime: f64) -> Vec<(usize, usize)> {
    comps
        .iter()
        .enumerate()
        .flat_map(|(m, c)| {
            let slice = c.tree().slice(lifetime).expect("lifetime within horizon");
            slice.leaf_nodes().into_iter().map(move |node| (m, node))
        })
        .collect()
}

fn point_from_predictions(
    lifetime: f64,
    n_features: usize,
    predictions: &[f64],
    targets: &[&[f64]],
    sizes: [usize; 3],
) -> Result<SweepPoint> {
    let (a, b) = (sizes[0], sizes[0] + sizes[1]);
    Ok(SweepPoint {
        lifetime,
        n_features,
        train: metrics(&predictions[..a], targets[0])?,
        validation: metrics(&predictions[a..b], targets[1])?,
        test: metrics(&predictions[b..], targets[2])?,
    })
}

/// Split event: rows `order[start..mid]` leave rows `order[mid..end]`.
#[derive(Clone, Copy, Debug)]
struct Event {
    time: f64,
    component: usize,
    start: usize,
    mid: usize,
    end: usize,
}

/// Shared-cell counts between all rows and the training rows.
struct SharedCells {
    n_rows: usize,
    n_train: usize,
    n_components: usize,
    /// Row-major `n_rows x n_train`.
    counts: Vec<u32>,
    /// Per component, rows in depth-first leaf order at the horizon.
    orders: Vec<Vec<usize>>,
    events: Vec<Event>,
    next_event: usize,
}

impl SharedCells {
    fn new(points: &[&[f64]], comps: &[PartitionComponent], n_train: usize) -> Self {
        let n_rows = points.len();
        let per_component: Vec<(Vec<usize>, Vec<Event>)> = comps
            .par_iter()
            .enumerate()
            .map(|(m, c)| component_events(m, c, points))
            .collect();
        let mut orders = Vec::with_capacity(comps.len());
        let mut events = Vec::new();
        for (order, ev) in per_component {
            orders.push(order);
            events.extend(ev);
        }
        events.sort_by(|a, b| {
            a.time
                .total_cmp(&b.time)
                .then(a.component.cmp(&b.component))
                .then(a.start.cmp(&b.start))
        });
        Self {
            n_rows,
            n_train,
            n_components: comps.len(),
            counts: vec![comps.len() as u32; n_rows * n_train],
            orders,
            events,
            next_event: 0,
        }
    }

    fn advance_to(&mut self, lifetime: f64) {
        while let Some(e) = self.events.get(self.next_event).copied() {
            if e.time > lifetime {
                break;
            }
            self.next_event += 1;
            let order = &self.orders[e.component];
            let (left, right) = (&order[e.start..e.mid], &order[e.mid..e.end]);
            for &a in left {
                for &b in right {
                    if b < self.n_train {
                        self.counts[a * self.n_train + b] -= 1;
                    }
                    if a < self.n_train {
                        self.counts[b * self.n_train + a] -= 1;
                    }
                }
            }
        }
    }

    /// Kernel ridge predictions for every row.
    fn dual_fit(&self, ridge: f64, train_targets: &[f64]) -> Result<Vec<f64>> {
        let (nt, m) = (self.n_train, self.n_components as f64);
        let mut k = DMatrix::from_fn(nt, nt, |i, j| self.counts[i * nt + j] as f64 / m);
        for i in 0..nt {
            k[(i, i)] += ridge;
        }
        let alpha = solve_spd(k, &DVector::from_column_slice(train_targets))?;
        Ok((0..self.n_rows)
            .into_par_iter()
            .map(|r| {
                let row = &self.counts[r * nt..(r + 1) * nt];
                row.iter().zip(alpha.iter()).map(|(&c, a)| c as f64 * a).sum::<f64>() / m
            })
            .collect())
    }
}

/// Depth-first row order of one component and its split events; every
/// node owns a contiguous range of that order.
fn component_events(m: usize, c: &PartitionComponent, points: &[&[f64]]) -> (Vec<usize>, Vec<Event>) {
    let tree = c.tree();
    let horizon = tree.lambda_max();
    let slice = tree.slice(horizon).expect("horizon is a valid lifetime");
    let mut by_leaf: Vec<Vec<usize>> = vec![Vec::new(); slice.n_cells()];
    for (i, p) in points.iter().enumerate() {
        let node = tree.locate(&c.transform(p), horizon);
        by_leaf[slice.leaf_index(node).expect("leaf")].push(i);
    }
    let order: Vec<usize> = by_leaf.concat();

    // Leaf ranges are cumulative counts; internal ranges join their children.
    let nodes = tree.nodes();
    let mut range = vec![(0usize, 0usize); nodes.len()];
    let mut start = 0;
    for (leaf, node) in slice.leaf_nodes().into_iter().enumerate() {
        range[node] = (start, start + by_leaf[leaf].len());
        start += by_leaf[leaf].len();
    }
    // Children always have larger ids than their parent.
    for id in (0..nodes.len()).rev() {
        if let Some(s) = nodes[id].split {
            range[id] = (range[s.left].0, range[s.right].1);
        }
    }
    let events = nodes
        .iter()
        .enumerate()
        .filter_map(|(id, n)| {
            n.split.map(|s| Event {
                time: s.time,
                component: m,
                start: range[id].0,
                mid: range[s.left].1,
                end: range[id].1,
            })
        })
        .collect();
    (order, events)
}
