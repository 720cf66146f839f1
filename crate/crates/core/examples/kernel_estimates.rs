//! Kernel estimates of all four feature maps against their limits.

use rotated_mondrian::features::{FeatureMap, Method};
use rotated_mondrian::kernels::{laplace_kernel, IsotropicLimit};
use rotated_mondrian::rng::SeededRng;

fn main() -> rotated_mondrian::Result<()> {
    let (x, y): (Vec<f64>, Vec<f64>) = (vec![0.2, 0.3], vec![0.5, 0.6]);
    let lifetime = 2.0;
    let r = (x[0] - y[0]).hypot(x[1] - y[1]);
    let laplace = laplace_kernel(&x, &y, lifetime);
    let isotropic = IsotropicLimit::new(lifetime, 2)?.eval(r)?;
    println!("Laplace limit {laplace:.4}, isotropic limit {isotropic:.4}");

    for method in Method::ALL {
        let limit = if method == Method::RotatedMondrian {
            isotropic
        } else {
            laplace
        };
        for m in [10, 100, 1000] {
            let map = FeatureMap::build(&[&x, &y], method, m, lifetime, &SeededRng::new(7))?;
            let k = map.kernel_estimate(&x, &y, lifetime)?;
            println!("{method:>16} M={m:<5} k_M = {k:.4}  error {:+.4}", k - limit);
        }
    }

    // The same estimate as an inner product of explicit features.
    let map = FeatureMap::build(&[&x, &y], Method::Mondrian, 50, lifetime, &SeededRng::new(8))?;
    let z = map.featurize(&[&x, &y], lifetime)?;
    println!("feature matrix is {} x {}", z.n_rows(), z.n_cols());
    Ok(())
}
