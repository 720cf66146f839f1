//! Golden-section search over the lifetime of Fourier and binning features.

use rand::Rng;
use rotated_mondrian::dataset::Dataset;
use rotated_mondrian::features::Method;
use rotated_mondrian::regression::{bandwidth_search, RidgeConfig, SearchConfig};
use rotated_mondrian::rng::SeededRng;

fn sample(n: usize, rng: &SeededRng) -> rotated_mondrian::Result<Dataset> {
    let mut s = rng.stream();
    let points: Vec<Vec<f64>> = (0..n).map(|_| vec![s.gen(), s.gen(), s.gen()]).collect();
    let y = points
        .iter()
        .map(|p| (4.0 * p[0] - 2.0 * p[2]).cos() + 0.05 * s.gen::<f64>())
        .collect();
    Dataset::new(points, Some(y))
}

fn main() -> rotated_mondrian::Result<()> {
    let rng = SeededRng::new(2);
    let (train, validation) = (sample(300, &rng.derive(0))?, sample(100, &rng.derive(1))?);
    let search = SearchConfig {
        lower: 0.01,
        upper: 100.0,
        budget: 15,
    };
    for method in [Method::Fourier, Method::Binning] {
        let result = bandwidth_search(
            method,
            &train,
            &validation,
            200,
            &RidgeConfig::default(),
            &search,
            &rng.derive(2),
        )?;
        println!(
            "{method}: best lifetime {:.3} (validation RMSE {:.4}), final bracket [{:.3}, {:.3}]",
            result.best.lifetime, result.best.value, result.bracket.0, result.bracket.1
        );
    }
    Ok(())
}
