//! Axis-aligned against rotated Mondrian features on a thin slab along the
//! diagonal of the cube.

use rotated_mondrian::experiments::{run_mondrian_line, MondrianLineConfig, MondrianLineSpec};

fn main() -> rotated_mondrian::Result<()> {
    let config = MondrianLineConfig {
        spec: MondrianLineSpec {
            n_per_split: 300,
            ..MondrianLineSpec::default()
        },
        features: 200,
        ..MondrianLineConfig::default()
    };
    for sweep in run_mondrian_line(&config, 1)? {
        let best = sweep.best_point();
        println!(
            "{}: best lifetime {:.1}, test relative error {:.3}",
            sweep.method, best.lifetime, best.test.relative_error
        );
    }
    Ok(())
}
