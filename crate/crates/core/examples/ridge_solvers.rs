//! Exact and stochastic ridge solvers on the same random features.

use rand::Rng;
use rotated_mondrian::features::{FeatureMap, Method};
use rotated_mondrian::regression::{evaluate, fit, ridge_exact, RidgeConfig, SgdConfig, Solver};
use rotated_mondrian::rng::SeededRng;

fn main() -> rotated_mondrian::Result<()> {
    let rng = SeededRng::new(4);
    let mut s = rng.derive(0).stream();
    let points: Vec<Vec<f64>> = (0..300).map(|_| vec![s.gen(), s.gen()]).collect();
    let targets: Vec<f64> = points.iter().map(|p| (6.0 * p[0]).sin() + p[1] * p[1]).collect();

    let map = FeatureMap::build(&points, Method::RotatedMondrian, 30, 5.0, &rng.derive(1))?;
    let z = map.featurize(&points, 5.0)?;
    println!("{} rows, {} features", z.n_rows(), z.n_cols());

    let exact = ridge_exact(&z, &targets, 1e-4)?;
    let sgd = fit(
        &z,
        &targets,
        &RidgeConfig {
            ridge: 1e-4,
            solver: Solver::Sgd(SgdConfig::default()),
        },
        &mut rng.derive(2).stream(),
    )?;
    let gap = exact.iter().zip(&sgd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
        / exact.iter().map(|a| a * a).sum::<f64>().sqrt();
    println!("exact train RMSE {:.4}", evaluate(&exact, &z, &targets)?.rmse);
    println!("SGD   train RMSE {:.4}", evaluate(&sgd, &z, &targets)?.rmse);
    println!("relative weight gap {gap:.2e}");
    Ok(())
}
