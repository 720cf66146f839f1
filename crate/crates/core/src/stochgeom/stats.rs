//! Small statistics helpers for the Monte Carlo checks.

/// Asymptotic Kolmogorov distribution quantile at level 0.01.
const KOLMOGOROV_99: f64 = 1.627_62;

/// Sample mean and its standard error.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// 1% critical value of the KS statistic for effective sample size `n`
/// (`n m / (n + m)` for two samples).
pub fn ks_critical_1pct(n: f64) -> f64 {
    KOLMOGOROV_99 / n.sqrt()
}

/// One-sample KS statistic against `Exp(rate)`.
pub fn exponential_ks(samples: &[f64], rate: f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = 1.0 - (-rate * x).exp();
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Two-sample KS statistic `sup |F_a - F_b|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Upper bound on `P[R >= a]` for the circumradius of the typical cell:
/// `exp(-2 M lambda a / d) (sum_{n<d} (2 lambda a / d)^n / n!)^M`.
pub fn circumradius_survival_bound(m: usize, lifetime: f64, dim: usize, a: f64) -> f64 {
    let x = 2.0 * lifetime * a / dim as f64;
    let mut term = 1.0;
    let mut partial = 0.0;
    for n in 0..dim {
        if n > 0 {
            term *= x / n as f64;
        }
        partial += term;
    }
    (-(m as f64) * x).exp() * partial.powi(m as i32)
}
