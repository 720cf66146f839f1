//! Draws regression data from a Gaussian process with the limiting rotated
//! kernel and recovers its lifetime by sweeping rotated Mondrian features.

use rotated_mondrian::experiments::{run_recover, RecoverConfig};

fn main() -> rotated_mondrian::Result<()> {
    let config = RecoverConfig::default();
    let sweep = run_recover(&config, 3)?;
    println!(
        "true lifetime {}, sweep over {} lifetimes",
        config.true_lifetime,
        sweep.points.len()
    );
    for p in sweep.points.iter().step_by(sweep.points.len().div_ceil(10)) {
        println!(
            "lifetime {:>8.3}: train {:.3}  validation {:.3}  test {:.3}",
            p.lifetime, p.train.rmse, p.validation.rmse, p.test.rmse
        );
    }
    println!("selected lifetime {:.3}", sweep.lifetime_hat());
    Ok(())
}
