//! Closed-form limiting kernels and Gaussian-process sampling from them.
//!
//! Without rotation the Mondrian kernel converges to the Laplace kernel
//! `exp(-lambda |x - x'|_1)`. With a Haar rotation drawn per tessellation the
//! limit is the sphere average
//!
//! ```text
//! k(r) = (1 / omega_d) * integral over S^{d-1} of exp(-lambda r |v|_1) dv,   r = |x - x'|_2
//! ```
//!
//! computed here by one-dimensional quadrature for `d = 2` and by
//! antithetic Monte Carlo over the sphere for `d >= 3`.

mod gp;
pub mod quadrature;

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::SeededRng;

pub use gp::{gp_sample, gram_matrix, JitterSchedule};

/// Volume and surface area of the unit ball in `R^d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BallConstants {
    pub dim: usize,
    /// Volume of the unit ball.
    pub kappa: f64,
    /// Surface area of the unit sphere, `d * kappa`.
    pub omega: f64,
}

pub fn unit_ball_constants(dim: usize) -> Result<BallConstants> {
    if dim == 0 {
        return Err(Error::InvalidDimension(0));
    }
    // kappa_d = 2 pi / d * kappa_{d-2}, kappa_0 = 1, kappa_1 = 2.
    let mut kappa = if dim.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut k = if dim.is_multiple_of(2) { 2 } else { 3 };
    while k <= dim {
        kappa *= 2.0 * PI / k as f64;
        k += 2;
    }
    Ok(BallConstants {
        dim,
        kappa,
        omega: dim as f64 * kappa,
    })
}

pub fn laplace_kernel(x: &[f64], y: &[f64], lifetime: f64) -> f64 {
    let l1: f64 = x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum();
    (-lifetime * l1).exp()
}

pub(crate) fn l2_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// How the sphere average is computed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Integration {
    /// Closed form (`d = 1`) or adaptive quadrature (`d = 2`).
    Deterministic,
    /// `samples` antithetic pairs of uniform directions drawn from `seed`.
    MonteCarlo { samples: usize, seed: u64 },
}

/// Value of a sphere average together with its Monte Carlo standard error
/// (zero for deterministic integration).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

/// Limiting kernel of the uniformly rotated Mondrian process.
///
/// Monte Carlo variants fix their sphere sample at construction, so the
/// kernel is a deterministic, positive definite function of `r`.
#[derive(Clone, Debug)]
pub struct IsotropicLimit {
    lifetime: f64,
    dim: usize,
    integration: Integration,
    /// `|v|_1` over the sphere sample (Monte Carlo only).
    l1_norms: Vec<f64>,
}

pub const QUADRATURE_TOLERANCE: f64 = 1e-10;

impl IsotropicLimit {
    /// Deterministic integration for `d <= 2`; for `d >= 3` use
    /// [`Self::monte_carlo`].
    pub fn new(lifetime: f64, dim: usize) -> Result<Self> {
        check_lifetime(lifetime)?;
        match dim {
            0 => Err(Error::InvalidDimension(0)),
            1 | 2 => Ok(Self {
                lifetime,
                dim,
                integration: Integration::Deterministic,
                l1_norms: Vec::new(),
            }),
            _ => Err(Error::Unsupported(format!(
                "deterministic sphere integration in dimension {dim}; use Monte Carlo"
            ))),
        }
    }

    /// Sphere average over `samples` antithetic pairs `(v, -v)` of normalized
    /// Gaussian directions. `|v|_1` is even, so each pair contributes twice.
    pub fn monte_carlo(lifetime: f64, dim: usize, samples: usize, seed: u64) -> Result<Self> {
        check_lifetime(lifetime)?;
        if dim == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if samples < 2 {
            return Err(Error::param("Monte Carlo integration needs at least 2 samples"));
        }
        let mut rng = SeededRng::new(seed).derive(dim as u64).stream();
        let l1_norms = (0..samples)
            .map(|_| {
                let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
                let n2 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                // Pair v with -v; both share |v|_1.
                v.iter().map(|x| x.abs()).sum::<f64>() / n2
            })
            .collect();
        Ok(Self {
            lifetime,
            dim,
            integration: Integration::MonteCarlo { samples, seed },
            l1_norms,
        })
    }

    /// Deterministic for `d <= 2`, Monte Carlo with `samples` otherwise.
    pub fn auto(lifetime: f64, dim: usize, samples: usize, seed: u64) -> Result<Self> {
        if dim <= 2 {
            Self::new(lifetime, dim)
        } else {
            Self::monte_carlo(lifetime, dim, samples, seed)
        }
    }

    pub fn lifetime(&self) -> f64 {
        self.lifetime
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn integration(&self) -> Integration {
        self.integration
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        Ok(self.estimate(r)?.value)
    }

    pub fn estimate(&self, r: f64) -> Result<Estimate> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::param(format!("distance must be finite and >= 0, got {r}")));
        }
        let a = self.lifetime * r;
        if a == 0.0 {
            return Ok(Estimate {
                value: 1.0,
                std_error: 0.0,
            });
        }
        match self.integration {
            Integration::Deterministic if self.dim == 1 => Ok(Estimate {
                value: (-a).exp(),
                std_error: 0.0,
            }),
            Integration::Deterministic => {
                // Quarter arc by sign symmetry of |v|_1 on the circle.
                let f = |t: f64| (-a * (t.cos() + t.sin())).exp();
                let v = quadrature::adaptive_simpson(&f, 0.0, PI / 2.0, QUADRATURE_TOLERANCE);
                Ok(Estimate {
                    value: 2.0 / PI * v,
                    std_error: 0.0,
                })
            }
            Integration::MonteCarlo { .. } => {
                let n = self.l1_norms.len() as f64;
                let (mut s, mut s2) = (0.0, 0.0);
                for &l1 in &self.l1_norms {
                    let e = (-a * l1).exp();
                    s += e;
                    s2 += e * e;
                }
                let mean = s / n;
                let var = ((s2 - n * mean * mean) / (n - 1.0)).max(0.0);
                Ok(Estimate {
                    value: mean,
                    std_error: (var / n).sqrt(),
                })
            }
        }
    }
}

/// Free-function form: `d <= 2` deterministic, otherwise `samples` Monte
/// Carlo pairs from `seed`.
pub fn isotropic_limit_kernel(r: f64, lifetime: f64, dim: usize, samples: usize, seed: u64) -> Result<Estimate> {
    IsotropicLimit::auto(lifetime, dim, samples, seed)?.estimate(r)
}

fn check_lifetime(lifetime: f64) -> Result<()> {
    if !(lifetime > 0.0) || !lifetime.is_finite() {
        return Err(Error::param(format!("lifetime must be positive, got {lifetime}")));
    }
    Ok(())
}

/// A limiting kernel, evaluable on pairs of points.
#[derive(Clone, Debug)]
pub enum KernelSpec {
    Laplace { lifetime: f64 },
    IsotropicLimit(IsotropicLimit),
}

impl KernelSpec {
    pub fn laplace(lifetime: f64) -> Result<Self> {
        check_lifetime(lifetime)?;
        Ok(KernelSpec::Laplace { lifetime })
    }

    pub fn isotropic(lifetime: f64, dim: usize, samples: usize, seed: u64) -> Result<Self> {
        Ok(KernelSpec::IsotropicLimit(IsotropicLimit::auto(
            lifetime, dim, samples, seed,
        )?))
    }

    pub fn lifetime(&self) -> f64 {
        match self {
            KernelSpec::Laplace { lifetime } => *lifetime,
            KernelSpec::IsotropicLimit(k) => k.lifetime(),
        }
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            KernelSpec::Laplace { lifetime } => laplace_kernel(x, y, *lifetime),
            KernelSpec::IsotropicLimit(k) => k
                .eval(l2_distance(x, y))
                .expect("distance between finite points is valid"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rotation::sample_rotation;
    use proptest::prelude::*;

    #[test]
    fn ball_constants() {
        let c1 = unit_ball_constants(1).unwrap();
        assert_eq!((c1.kappa, c1.omega), (2.0, 2.0));
        let c2 = unit_ball_constants(2).unwrap();
        assert!((c2.kappa - PI).abs() < 1e-15 && (c2.omega - 2.0 * PI).abs() < 1e-15);
        let c3 = unit_ball_constants(3).unwrap();
        assert!((c3.kappa - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((c3.omega - 4.0 * PI).abs() < 1e-13);
        for d in 1..12 {
            let c = unit_ball_constants(d).unwrap();
            assert!((c.omega - d as f64 * c.kappa).abs() < 1e-12);
        }
        assert!(unit_ball_constants(0).is_err());
    }

    #[test]
    fn laplace_values() {
        assert_eq!(laplace_kernel(&[0.3, 0.4], &[0.3, 0.4], 2.0), 1.0);
        let v = laplace_kernel(&[0.0, 0.0], &[0.1, 0.2], 1.0);
        assert!((v - 0.740818).abs() < 1e-6);
        let a = laplace_kernel(&[0.0, 0.0], &[0.1, -0.2], 2.0);
        let b = laplace_kernel(&[0.0, 0.0], &[0.2, -0.4], 1.0);
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn isotropic_trivial_cases() {
        for d in 1..=4 {
            assert_eq!(isotropic_limit_kernel(0.0, 3.0, d, 1000, 1).unwrap().value, 1.0);
        }
        let v = isotropic_limit_kernel(0.7, 2.0, 1, 0, 0).unwrap().value;
        assert!((v - (-1.4f64).exp()).abs() < 1e-15);
        assert!(isotropic_limit_kernel(-0.1, 1.0, 2, 0, 0).is_err());
        assert!(IsotropicLimit::new(0.0, 2).is_err());
    }

    #[test]
    fn isotropic_d2_inside_envelope_and_matches_sphere_monte_carlo() {
        let k = IsotropicLimit::new(1.0, 2).unwrap();
        let v = k.eval(1.0).unwrap();
        assert!(v >= (-(2f64.sqrt())).exp() && v <= (-1f64).exp(), "{v}");
        // Independent oracle: Haar rotations applied to e_1.
        let mut rng = SeededRng::new(123).stream();
        let n = 200_000;
        let mut s = 0.0;
        let mut s2 = 0.0;
        for _ in 0..n {
            let u = sample_rotation(2, &mut rng).unwrap().axis(0);
            let e = (-(u[0].abs() + u[1].abs())).exp();
            s += e;
            s2 += e * e;
        }
        let mean = s / n as f64;
        let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - v).abs() < 3.0 * se, "quad {v} mc {mean} se {se}");
    }

    #[test]
    fn monte_carlo_in_d2_agrees_with_quadrature() {
        let quad = IsotropicLimit::new(1.0, 2).unwrap();
        let mc = IsotropicLimit::monte_carlo(1.0, 2, 100_000, 9).unwrap();
        for r in [0.1, 0.5, 1.0, 2.0] {
            let q = quad.eval(r).unwrap();
            let e = mc.estimate(r).unwrap();
            assert!((q - e.value).abs() <= 3.0 * e.std_error, "r={r}: {q} vs {e:?}");
        }
    }

    #[test]
    fn kernel_spec_dispatch() {
        let lap = KernelSpec::laplace(1.0).unwrap();
        assert!((lap.eval(&[0.0, 0.0], &[0.1, 0.2]) - (-0.3f64).exp()).abs() < 1e-15);
        let iso = KernelSpec::isotropic(1.0, 2, 0, 0).unwrap();
        let a = iso.eval(&[0.0, 0.0], &[0.3, 0.4]);
        let b = iso.eval(&[0.0, 0.0], &[0.5, 0.0]);
        assert!((a - b).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn envelope(r in 0.0f64..5.0, lambda in 0.1f64..5.0, d in 1usize..5) {
            let v = isotropic_limit_kernel(r, lambda, d, 2000, 5).unwrap().value;
            let lo = (-lambda * (d as f64).sqrt() * r).exp();
            let hi = (-lambda * r).exp();
            prop_assert!(lo - 1e-12 <= v && v <= hi + 1e-12);
        }

        #[test]
        fn monotone_in_r_and_lambda(r in 0.0f64..3.0, dr in 0.01f64..1.0, lambda in 0.1f64..3.0, dl in 0.01f64..1.0) {
            let k = IsotropicLimit::new(lambda, 2).unwrap();
            prop_assert!(k.eval(r + dr).unwrap() < k.eval(r).unwrap());
            let k2 = IsotropicLimit::new(lambda + dl, 2).unwrap();
            prop_assert!(k2.eval(r + 0.01).unwrap() < k.eval(r + 0.01).unwrap());
        }

        #[test]
        fn lipschitz(r1 in 0.0f64..3.0, r2 in 0.0f64..3.0, lambda in 0.1f64..3.0, d in 1usize..4) {
            let k = IsotropicLimit::auto(lambda, d, 2000, 3).unwrap();
            let diff = (k.eval(r1).unwrap() - k.eval(r2).unwrap()).abs();
            prop_assert!(diff <= lambda * (d as f64).sqrt() * (r1 - r2).abs() + 1e-12);
        }
    }
}
