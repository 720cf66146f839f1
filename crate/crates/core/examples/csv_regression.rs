//! Loads a CSV table, splits it and fits every method.
//!
//! Usage: `cargo run --example csv_regression -- data.csv target_column`.
//! Without arguments a synthetic table is written to a temporary file first.

use std::env;

use rotated_mondrian::dataset::load_csv;
use rotated_mondrian::experiments::cpu_like_dataset;
use rotated_mondrian::features::Method;
use rotated_mondrian::geometry::bounding_box;
use rotated_mondrian::regression::{bandwidth_search, lifetime_sweep, RidgeConfig, SearchConfig, SweepConfig};
use rotated_mondrian::rng::SeededRng;

fn main() -> rotated_mondrian::Result<()> {
    let args: Vec<String> = env::args().skip(1).collect();
    let rng = SeededRng::new(11);
    let data = match args.as_slice() {
        [path, target] => load_csv(path, Some(target))?,
        _ => {
            let path = env::temp_dir().join("csv_regression_example.csv");
            let d = cpu_like_dataset(400, &rng.derive(0))?;
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(d.columns().expect("named columns"))?;
            for (p, y) in d.points().iter().zip(d.targets().expect("targets")) {
                w.write_record(p.iter().chain([y]).map(|v| v.to_string()))?;
            }
            w.flush().map_err(|e| rotated_mondrian::Error::Io {
                path: path.clone(),
                source: e,
            })?;
            println!("wrote {}", path.display());
            load_csv(&path, Some("y"))?
        }
    };
    let parts = data.split(&[0.6, 0.2, 0.2], &rng.derive(1))?;
    let (train, validation, test) = (&parts[0], &parts[1], &parts[2]);
    let diameter = bounding_box(train.points())?.linear_dimension();
    let (lo, hi) = (0.1 / diameter, 100.0 / diameter);

    for method in Method::ALL {
        if method.is_partition() {
            let sweep = lifetime_sweep(
                train,
                validation,
                test,
                &SweepConfig::new(method, 100, hi),
                &rng.derive(2),
            )?;
            let b = sweep.best_point();
            println!(
                "{method}: lifetime {:.3e}, validation RMSE {:.4}",
                b.lifetime, b.validation.rmse
            );
        } else {
            let search = SearchConfig {
                lower: lo,
                upper: hi,
                budget: 12,
            };
            let r = bandwidth_search(
                method,
                train,
                validation,
                100,
                &RidgeConfig::default(),
                &search,
                &rng.derive(3),
            )?;
            println!(
                "{method}: lifetime {:.3e}, validation RMSE {:.4}",
                r.best.lifetime, r.best.value
            );
        }
    }
    Ok(())
}
