//! Minibatch SGD for the ridge primal with periodic full-gradient anchors.
//!
//! Each epoch takes a snapshot `w~`, computes the full gradient there, and
//! then runs `ceil(N / batch)` minibatch steps with the variance-reduced
//! direction `g_B(w) - g_B(w~) + grad F(w~)` at a constant step. The
//! constant step converges linearly to the exact minimizer, which is what
//! lets the solver be checked against [`super::ridge_exact`].

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_ridge, check_shapes};
use crate::error::{Error, Result};
use crate::features::Features;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SgdConfig {
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Step as a fraction of `1 / L_max`, where `L_max` is the largest
    /// per-row smoothness constant.
    pub step_scale: f64,
    /// Stop once `||grad F(w)|| <= tolerance * ||grad F(w_0)||`.
    pub tolerance: f64,
    /// Consecutive epochs of rising objective treated as divergence.
    pub patience: usize,
}

impl Default for SgdConfig {
    fn default() -> Self {
        Self {
            batch_size: 32,
            max_epochs: 50_000,
            step_scale: 0.5,
            tolerance: 1e-10,
            patience: 5,
        }
    }
}

impl SgdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.max_epochs == 0 || self.patience == 0 {
            return Err(Error::param("batch size, epochs and patience must be positive"));
        }
        if !(self.step_scale > 0.0) || !(self.tolerance >= 0.0) {
            return Err(Error::param("step scale must be positive and tolerance nonnegative"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SgdFit {
    pub weights: Vec<f64>,
    pub epochs: usize,
    pub converged: bool,
    /// Gradient norm of the averaged objective at the returned weights.
    pub gradient_norm: f64,
}

/// Approximate ridge minimizer from a zero start.
pub fn ridge_sgd<R: Rng + ?Sized>(
    features: &Features,
    targets: &[f64],
    ridge: f64,
    config: &SgdConfig,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let init = vec![0.0; features.n_cols()];
    Ok(ridge_sgd_from(features, targets, ridge, config, init, rng)?.weights)
}

/// Full gradient of `F(w) = (1/N)(||Z w - y||^2 + ridge ||w||^2)` and the
/// unscaled objective.
fn full_gradient(features: &Features, targets: &[f64], ridge: f64, w: &[f64]) -> (Vec<f64>, f64) {
    let n = targets.len() as f64;
    let resid: Vec<f64> = features.mul(w).iter().zip(targets).map(|(p, y)| p - y).collect();
    let mut g = features.transpose_mul(&resid);
    for (gj, wj) in g.iter_mut().zip(w) {
        *gj = 2.0 * (*gj + ridge * wj) / n;
    }
    let objective = resid.iter().map(|r| r * r).sum::<f64>() + ridge * w.iter().map(|v| v * v).sum::<f64>();
    (g, objective)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// As [`ridge_sgd`] but starting from `init`, returning convergence details.
pub fn ridge_sgd_from<R: Rng + ?Sized>(
    features: &Features,
    targets: &[f64],
    ridge: f64,
    config: &SgdConfig,
    init: Vec<f64>,
    rng: &mut R,
) -> Result<SgdFit> {
    check_shapes(features, targets)?;
    check_ridge(ridge)?;
    config.validate()?;
    if init.len() != features.n_cols() {
        return Err(Error::ShapeMismatch(format!(
            "{} initial weights for {} features",
            init.len(),
            features.n_cols()
        )));
    }
    let n = targets.len();
    let nf = n as f64;
    let l_max = (0..n)
        .map(|i| 2.0 * features.row_norm_squared(i) + 2.0 * ridge / nf)
        .fold(0.0, f64::max);
    let step = config.step_scale / l_max;

    let (g0, _) = full_gradient(features, targets, ridge, &vec![0.0; init.len()]);
    let mut w = init;
    let (mut anchor_grad, mut objective) = full_gradient(features, targets, ridge, &w);
    let reference = norm(&g0).max(norm(&anchor_grad));
    let threshold = config.tolerance * reference;

    let mut order: Vec<usize> = (0..n).collect();
    let mut rising = 0;
    let mut epochs = 0;
    let mut diff = vec![0.0; w.len()];
    while norm(&anchor_grad) > threshold && epochs < config.max_epochs {
        epochs += 1;
        let anchor = w.clone();
        order.shuffle(rng);
        for batch in order.chunks(config.batch_size) {
            let b = batch.len() as f64;
            for (d, (wj, aj)) in diff.iter_mut().zip(w.iter().zip(&anchor)) {
                *d = wj - aj;
            }
            // Dense part: anchor gradient plus the ridge term of the difference.
            let shrink = 2.0 * ridge / nf;
            for j in 0..w.len() {
                w[j] -= step * (anchor_grad[j] + shrink * diff[j]);
            }
            for &i in batch {
                let coef = 2.0 * features.row_dot(i, &diff) / b;
                features.for_each_in_row(i, |j, z| w[j] -= step * coef * z);
            }
        }
        let (g, obj) = full_gradient(features, targets, ridge, &w);
        if !obj.is_finite() {
            return Err(Error::Diverged {
                epoch: epochs,
                streak: rising + 1,
                objective: obj,
            });
        }
        // Rounding noise at the optimum is not divergence.
        rising = if obj > objective * (1.0 + 1e-9) { rising + 1 } else { 0 };
        if rising >= config.patience {
            return Err(Error::Diverged {
                epoch: epochs,
                streak: rising,
                objective: obj,
            });
        }
        anchor_grad = g;
        objective = obj;
    }
    let gradient_norm = norm(&anchor_grad);
    Ok(SgdFit {
        weights: w,
        epochs,
        converged: gradient_norm <= threshold,
        gradient_norm,
    })
}
