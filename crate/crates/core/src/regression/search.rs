//! Golden-section search over `log(lambda)` for kernels without a cheap
//! lifetime sweep.

use serde::{Deserialize, Serialize};

use super::{evaluate, fit, RidgeConfig};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::features::{FeatureMap, Method};
use crate::rng::SeededRng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub lower: f64,
    pub upper: f64,
    /// Total number of objective evaluations, at least 3.
    pub budget: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub lifetime: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandwidthSearch {
    pub best: Probe,
    /// Every evaluation in the order performed.
    pub probes: Vec<Probe>,
    /// Final bracket `(lower, upper)`.
    pub bracket: (f64, f64),
}

impl BandwidthSearch {
    pub fn bracket_width(&self) -> f64 {
        self.bracket.1 - self.bracket.0
    }
}

/// Minimizes `objective` over `[lower, upper]` by golden-section search in
/// log space, spending exactly `budget` evaluations. Returns the best probe,
/// the smallest lifetime among ties.
pub fn golden_section_search<F>(mut objective: F, config: &SearchConfig) -> Result<BandwidthSearch>
where
    F: FnMut(f64) -> Result<f64>,
{
    let SearchConfig { lower, upper, budget } = *config;
    if !(lower > 0.0 && upper > lower && upper.is_finite()) {
        return Err(Error::param(format!("invalid search range [{lower}, {upper}]")));
    }
    if budget < 3 {
        return Err(Error::param(format!("search budget must be at least 3, got {budget}")));
    }
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut probes = Vec::with_capacity(budget);
    let mut eval = |log_l: f64, probes: &mut Vec<Probe>| -> Result<f64> {
        let lifetime = log_l.exp();
        let v = objective(lifetime)?;
        let value = if v.is_nan() { f64::INFINITY } else { v };
        probes.push(Probe { lifetime, value });
        Ok(value)
    };

    let (mut a, mut b) = (lower.ln(), upper.ln());
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = eval(c, &mut probes)?;
    let mut fd = eval(d, &mut probes)?;
    while probes.len() < budget {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = eval(c, &mut probes)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = eval(d, &mut probes)?;
        }
    }
    let best = probes
        .iter()
        .copied()
        .reduce(|best, p| {
            if p.value < best.value || (p.value == best.value && p.lifetime < best.lifetime) {
                p
            } else {
                best
            }
        })
        .expect("at least three probes");
    Ok(BandwidthSearch {
        best,
        probes,
        bracket: (a.exp(), b.exp()),
    })
}

/// Chooses the lifetime of a Fourier or binning map by validation RMSE.
///
/// One map is drawn (from `rng.derive(0)`) and rescaled for each probe, so
/// the search compares lifetimes on common randomness.
pub fn bandwidth_search(
    method: Method,
    train: &Dataset,
    validation: &Dataset,
    n_components: usize,
    ridge: &RidgeConfig,
    config: &SearchConfig,
    rng: &SeededRng,
) -> Result<BandwidthSearch> {
    bandwidth_search_with(method, train, validation, n_components, ridge, config, rng, |_| {})
}

/// As [`bandwidth_search`], calling `observe` after each probe.
#[allow(clippy::too_many_arguments)]
pub fn bandwidth_search_with<F: FnMut(&Probe)>(
    method: Method,
    train: &Dataset,
    validation: &Dataset,
    n_components: usize,
    ridge: &RidgeConfig,
    config: &SearchConfig,
    rng: &SeededRng,
    mut observe: F,
) -> Result<BandwidthSearch> {
    if method.is_partition() {
        return Err(Error::Unsupported(format!(
            "bandwidth search is for fourier and binning; use the lifetime sweep for `{method}`"
        )));
    }
    ridge.validate()?;
    let (ytr, yva) = (train.require_targets()?, validation.require_targets()?);
    let all: Vec<&[f64]> = train
        .points()
        .iter()
        .chain(validation.points())
        .map(|p| p.as_slice())
        .collect();
    let map = FeatureMap::build(&all, method, n_components, 1.0, &rng.derive(0))?;
    let train_rows: Vec<usize> = (0..train.len()).collect();
    let val_rows: Vec<usize> = (train.len()..all.len()).collect();
    let mut stream = rng.derive(1).stream();
    golden_section_search(
        |lifetime| {
            let z = map.featurize(&all, lifetime)?;
            let w = fit(&z.select_rows(&train_rows), ytr, ridge, &mut stream)?;
            let value = evaluate(&w, &z.select_rows(&val_rows), yva)?.rmse;
            observe(&Probe { lifetime, value });
            Ok(value)
        },
        config,
    )
}
