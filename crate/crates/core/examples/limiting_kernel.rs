//! The limiting rotated kernel sits between two Laplace kernels.

use rotated_mondrian::kernels::IsotropicLimit;

fn main() -> rotated_mondrian::Result<()> {
    let lifetime = 1.0;
    let k2 = IsotropicLimit::new(lifetime, 2)?;
    let k3 = IsotropicLimit::monte_carlo(lifetime, 3, 50_000, 1)?;
    println!(
        "{:>5} {:>10} {:>10} {:>10} {:>10}",
        "r", "exp(-r)", "k_2", "k_3", "exp(-r√3)"
    );
    for i in 0..=10 {
        let r = 0.3 * i as f64;
        let e3 = k3.estimate(r)?;
        println!(
            "{r:>5.2} {:>10.5} {:>10.5} {:>10.5} {:>10.5}   (MC se {:.1e})",
            (-r).exp(),
            k2.eval(r)?,
            e3.value,
            (-r * 3f64.sqrt()).exp(),
            e3.std_error
        );
    }
    Ok(())
}
