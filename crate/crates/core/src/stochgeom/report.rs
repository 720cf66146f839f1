//! Monte Carlo summary of the typical cell against its known moments and
//! bounds.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{circumradius_survival_bound, exponential_ks, ks_critical_1pct, mean_and_se};
use super::{circumradius, inradius, sample_typical_cell_with, volume};
use crate::error::{Error, Result};
use crate::kernels::unit_ball_constants;
use crate::rng::SeededRng;
use crate::rotation::Rotation;

const CHUNK: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypicalCellConfig {
    pub n_rotations: usize,
    pub lifetime: f64,
    pub dim: usize,
    pub samples: usize,
    /// Circumradius survival thresholds.
    pub thresholds: Vec<f64>,
}

impl TypicalCellConfig {
    pub fn new(n_rotations: usize, lifetime: f64, dim: usize, samples: usize) -> Self {
        Self {
            n_rotations,
            lifetime,
            dim,
            samples,
            thresholds: vec![0.5, 1.0, 2.0, 4.0],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSample {
    pub volume: f64,
    pub inradius: f64,
    pub circumradius: f64,
}

/// Samples cells in fixed chunks, chunk `c` from `rng.derive(c)`, so the
/// result does not depend on the thread count.
pub fn sample_cells(config: &TypicalCellConfig, pre: Option<&Rotation>, rng: &SeededRng) -> Result<Vec<CellSample>> {
    let chunks = config.samples.div_ceil(CHUNK);
    let parts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut stream = rng.derive(c as u64).stream();
            let len = CHUNK.min(config.samples - c * CHUNK);
            (0..len)
                .map(|_| {
                    let cell =
                        sample_typical_cell_with(config.n_rotations, config.lifetime, config.dim, pre, &mut stream)?;
                    Ok(CellSample {
                        volume: volume(&cell)?,
                        inradius: inradius(&cell),
                        circumradius: circumradius(&cell)?,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.concat())
}

/// Writes `volume,inradius,circumradius` rows.
pub fn write_samples_csv<W: Write>(samples: &[CellSample], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for s in samples {
        w.serialize(s)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Bounds on the mean cell volume:
/// `(1/kappa_d) (2 sqrt(d) / (lambda M))^d <= E[V] <= (1/kappa_d) (2 d / (M lambda))^d`.
pub fn volume_bounds(m: usize, lifetime: f64, dim: usize) -> Result<(f64, f64)> {
    let kappa = unit_ball_constants(dim)?.kappa;
    let d = dim as f64;
    let ml = m as f64 * lifetime;
    Ok((
        (2.0 * d.sqrt() / ml).powi(dim as i32) / kappa,
        (2.0 * d / ml).powi(dim as i32) / kappa,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsCheck {
    pub statistic: f64,
    pub critical_1pct: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InradiusCheck {
    pub mean: f64,
    pub std_error: f64,
    /// `1 / (2 M lambda)`.
    pub expected: f64,
    pub z: f64,
    pub pass: bool,
    /// KS test against `Exp(2 M lambda)`.
    pub ks: KsCheck,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeCheck {
    pub mean: f64,
    pub std_error: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// `(d / lambda)^d`, known only for `M = 1`.
    pub exact: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircumradiusCheck {
    pub threshold: f64,
    pub survival: f64,
    pub std_error: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypicalCellReport {
    pub config: TypicalCellConfig,
    pub inradius: InradiusCheck,
    pub volume: VolumeCheck,
    pub circumradius_mean: f64,
    pub circumradius_std_error: f64,
    pub survival: Vec<CircumradiusCheck>,
    /// Samples violating `r <= R` or `kappa r^d <= V <= kappa R^d`.
    pub geometry_violations: usize,
    pub passed: bool,
}

/// Samples `config.samples` typical cells and checks them at 3 standard
/// errors against the inradius law, the volume bounds and the circumradius
/// tail bound.
pub fn typical_cell_stats(config: &TypicalCellConfig, rng: &SeededRng) -> Result<TypicalCellReport> {
    if !(2..=3).contains(&config.dim) {
        return Err(Error::Unsupported(format!(
            "typical cell statistics need d = 2 or 3, got {}",
            config.dim
        )));
    }
    if config.samples < 1000 {
        return Err(Error::param("typical cell statistics need at least 1000 samples"));
    }
    let samples = sample_cells(config, None, rng)?;
    let n = samples.len() as f64;
    let (m, lambda, d) = (config.n_rotations, config.lifetime, config.dim);
    let rs: Vec<f64> = samples.iter().map(|s| s.inradius).collect();
    let vs: Vec<f64> = samples.iter().map(|s| s.volume).collect();
    let cs: Vec<f64> = samples.iter().map(|s| s.circumradius).collect();

    let rate = 2.0 * m as f64 * lambda;
    let (r_mean, r_se) = mean_and_se(&rs);
    let z = (r_mean - 1.0 / rate) / r_se;
    let ks_stat = exponential_ks(&rs, rate);
    let ks = KsCheck {
        statistic: ks_stat,
        critical_1pct: ks_critical_1pct(n),
        pass: ks_stat < ks_critical_1pct(n),
    };
    let inradius = InradiusCheck {
        mean: r_mean,
        std_error: r_se,
        expected: 1.0 / rate,
        z,
        pass: z.abs() <= 3.0 && ks.pass,
        ks,
    };

    let (v_mean, v_se) = mean_and_se(&vs);
    let (lower, upper) = volume_bounds(m, lambda, d)?;
    let exact = (m == 1).then(|| (d as f64 / lambda).powi(d as i32));
    let in_bracket = v_mean >= lower - 3.0 * v_se && v_mean <= upper + 3.0 * v_se;
    let volume = VolumeCheck {
        mean: v_mean,
        std_error: v_se,
        lower_bound: lower,
        upper_bound: upper,
        exact,
        pass: in_bracket && exact.is_none_or(|e| (v_mean - e).abs() <= 3.0 * v_se),
    };

    let survival: Vec<CircumradiusCheck> = config
        .thresholds
        .iter()
        .map(|&a| {
            let p = cs.iter().filter(|&&r| r >= a).count() as f64 / n;
            let se = (p * (1.0 - p) / n).sqrt();
            let bound = circumradius_survival_bound(m, lambda, d, a);
            CircumradiusCheck {
                threshold: a,
                survival: p,
                std_error: se,
                bound,
                pass: p <= bound + 3.0 * se,
            }
        })
        .collect();

    let kappa = unit_ball_constants(d)?.kappa;
    let tol = 1e-9;
    let geometry_violations = samples
        .iter()
        .filter(|s| {
            let (r, big_r, v) = (s.inradius, s.circumradius, s.volume);
            r > big_r * (1.0 + tol)
                || kappa * r.powi(d as i32) > v * (1.0 + tol)
                || v > kappa * big_r.powi(d as i32) * (1.0 + tol)
        })
        .count();

    let (c_mean, c_se) = mean_and_se(&cs);
    let passed = inradius.pass && volume.pass && survival.iter().all(|s| s.pass) && geometry_violations == 0;
    Ok(TypicalCellReport {
        config: config.clone(),
        inradius,
        volume,
        circumradius_mean: c_mean,
        circumradius_std_error: c_se,
        survival,
        geometry_violations,
        passed,
    })
}
