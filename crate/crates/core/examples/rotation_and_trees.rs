//! Draws a Haar rotation and a Mondrian tree, then reads partitions off the
//! tree at a few lifetimes.

use rotated_mondrian::geometry::AxisBox;
use rotated_mondrian::mondrian::build_mondrian;
use rotated_mondrian::rng::SeededRng;
use rotated_mondrian::rotation::sample_rotation;

fn main() -> rotated_mondrian::Result<()> {
    let rng = SeededRng::new(1);
    let r = sample_rotation(3, &mut rng.derive(0).stream())?;
    println!("rotation:\n{}", r.matrix());
    println!(
        "det = {:.12}, defect = {:.1e}",
        r.determinant(),
        r.orthogonality_defect()
    );

    let tree = build_mondrian(AxisBox::unit(2)?, 8.0, &mut rng.derive(1).stream())?;
    println!(
        "{} nodes, first cuts at {:?}",
        tree.nodes().len(),
        &tree.cut_times()[..3.min(tree.cut_times().len())]
    );
    let p = [0.3, 0.7];
    for lifetime in [0.5, 2.0, 8.0] {
        let slice = tree.slice(lifetime)?;
        println!(
            "lifetime {lifetime}: {} cells, {p:?} is in cell {}",
            slice.n_cells(),
            slice.cell_of(&tree, &p)?
        );
    }
    Ok(())
}
