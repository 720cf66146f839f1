//! Ridge regression on random features and lifetime selection.

mod search;
mod sgd;
mod sweep;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::Features;

pub use search::{
    bandwidth_search, bandwidth_search_with, golden_section_search, BandwidthSearch, Probe, SearchConfig,
};
pub use sgd::{ridge_sgd, ridge_sgd_from, SgdConfig, SgdFit};
pub use sweep::{
    evaluation_lifetimes, lifetime_sweep, lifetime_sweep_with, ErrorMetric, SweepConfig, SweepPoint, SweepResult,
};

/// Ridge constant used throughout the experiments.
pub const DEFAULT_RIDGE: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    Exact,
    Sgd(SgdConfig),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RidgeConfig {
    /// Penalty `delta^2` on `||w||^2`.
    pub ridge: f64,
    pub solver: Solver,
}

impl Default for RidgeConfig {
    fn default() -> Self {
        Self {
            ridge: DEFAULT_RIDGE,
            solver: Solver::Exact,
        }
    }
}

impl RidgeConfig {
    pub fn exact(ridge: f64) -> Self {
        Self {
            ridge,
            solver: Solver::Exact,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_ridge(self.ridge)?;
        if let Solver::Sgd(c) = &self.solver {
            c.validate()?;
        }
        Ok(())
    }
}

fn check_ridge(ridge: f64) -> Result<()> {
    if !(ridge > 0.0) || !ridge.is_finite() {
        return Err(Error::param(format!("ridge constant must be positive, got {ridge}")));
    }
    Ok(())
}

fn check_shapes(features: &Features, targets: &[f64]) -> Result<()> {
    if features.n_rows() != targets.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} feature rows but {} targets",
            features.n_rows(),
            targets.len()
        )));
    }
    if targets.is_empty() {
        return Err(Error::Empty("ridge regression needs at least one row"));
    }
    Ok(())
}

/// Ridge objective `||Z w - y||^2 + ridge ||w||^2`.
pub fn ridge_objective(features: &Features, targets: &[f64], weights: &[f64], ridge: f64) -> f64 {
    let fit: f64 = features
        .mul(weights)
        .iter()
        .zip(targets)
        .map(|(p, y)| (p - y) * (p - y))
        .sum();
    fit + ridge * weights.iter().map(|w| w * w).sum::<f64>()
}

/// Solves `A x = b` for symmetric positive definite `A`, falling back to LU
/// when rounding defeats the Cholesky factorization.
pub(crate) fn solve_spd(a: DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    if let Some(ch) = a.clone().cholesky() {
        return Ok(ch.solve(b));
    }
    a.lu()
        .solve(b)
        .ok_or_else(|| Error::param("ridge system is numerically singular"))
}

/// Exact minimizer of `||Z w - y||^2 + ridge ||w||^2`.
///
/// Uses the primal normal equations when there are no more features than
/// rows and the dual system `(Z Z^T + ridge I) a = y`, `w = Z^T a`
/// otherwise.
pub fn ridge_exact(features: &Features, targets: &[f64], ridge: f64) -> Result<Vec<f64>> {
    check_shapes(features, targets)?;
    check_ridge(ridge)?;
    let (n, c) = (features.n_rows(), features.n_cols());
    if c <= n {
        let mut a = features.column_gram();
        for j in 0..c {
            a[(j, j)] += ridge;
        }
        let b = DVector::from_vec(features.transpose_mul(targets));
        Ok(solve_spd(a, &b)?.data.into())
    } else {
        let mut k = features.row_gram();
        for i in 0..n {
            k[(i, i)] += ridge;
        }
        let alpha = solve_spd(k, &DVector::from_column_slice(targets))?;
        Ok(features.transpose_mul(alpha.as_slice()))
    }
}

/// Fits with whichever solver `config` names.
pub fn fit<R: rand::Rng + ?Sized>(
    features: &Features,
    targets: &[f64],
    config: &RidgeConfig,
    rng: &mut R,
) -> Result<Vec<f64>> {
    config.validate()?;
    match &config.solver {
        Solver::Exact => ridge_exact(features, targets, config.ridge),
        Solver::Sgd(sgd) => ridge_sgd(features, targets, config.ridge, sgd, rng),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub rmse: f64,
    /// `||y_hat - y|| / ||y||`.
    pub relative_error: f64,
}

/// Error metrics of predictions against targets.
pub fn metrics(predictions: &[f64], targets: &[f64]) -> Result<Metrics> {
    if predictions.len() != targets.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} predictions but {} targets",
            predictions.len(),
            targets.len()
        )));
    }
    if targets.is_empty() {
        return Err(Error::Empty("no targets to evaluate against"));
    }
    let sq: f64 = predictions.iter().zip(targets).map(|(p, y)| (p - y) * (p - y)).sum();
    let norm = targets.iter().map(|y| y * y).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroTargetNorm);
    }
    Ok(Metrics {
        rmse: (sq / targets.len() as f64).sqrt(),
        relative_error: sq.sqrt() / norm,
    })
}

/// Metrics of the linear predictor `Z w`.
pub fn evaluate(weights: &[f64], features: &Features, targets: &[f64]) -> Result<Metrics> {
    if weights.len() != features.n_cols() {
        return Err(Error::ShapeMismatch(format!(
            "{} weights for {} features",
            weights.len(),
            features.n_cols()
        )));
    }
    metrics(&features.mul(weights), targets)
}

#[cfg(test)]
mod tests;
