//! Samples typical cells of superposed rotated tessellations and compares
//! their moments with the known laws and bounds.

use rotated_mondrian::rng::SeededRng;
use rotated_mondrian::stochgeom::{
    circumradius, inradius, sample_typical_cell, typical_cell_stats, vertices, volume, TypicalCellConfig,
};

fn main() -> rotated_mondrian::Result<()> {
    let rng = SeededRng::new(6);
    let cell = sample_typical_cell(2, 1.0, 2, &mut rng.derive(0).stream())?;
    println!("one cell with {} vertices", vertices(&cell)?.len());
    println!(
        "volume {:.4}, inradius {:.4}, circumradius {:.4}",
        volume(&cell)?,
        inradius(&cell),
        circumradius(&cell)?
    );

    let report = typical_cell_stats(&TypicalCellConfig::new(2, 1.0, 2, 20_000), &rng.derive(1))?;
    println!(
        "inradius mean {:.4} vs {:.4} (z = {:.2})",
        report.inradius.mean, report.inradius.expected, report.inradius.z
    );
    println!(
        "volume mean {:.4} within [{:.4}, {:.4}]",
        report.volume.mean, report.volume.lower_bound, report.volume.upper_bound
    );
    for c in &report.survival {
        println!("P[R >= {}] = {:.4} <= {:.4}", c.threshold, c.survival, c.bound);
    }
    println!("all checks passed: {}", report.passed);
    Ok(())
}
