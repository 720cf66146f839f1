//! Monte Carlo check of the typical-cell moments and bounds.

use super::{Output, RunOptions};
use crate::error::Result;
use crate::rng::SeededRng;
use crate::stochgeom::{sample_cells, typical_cell_stats, write_samples_csv, TypicalCellConfig, TypicalCellReport};

/// Writes `typical_cell.json` and, when `write_samples` is set,
/// `typical_cell_samples.csv` (the same cells as the report).
pub fn typical_cell(
    config: &TypicalCellConfig,
    write_samples: bool,
    options: &RunOptions,
) -> Result<TypicalCellReport> {
    let rng = SeededRng::new(options.seed);
    let report = typical_cell_stats(config, &rng)?;
    let mut out = Output::new("typical-cell", config, options)?;
    out.write_json("typical_cell.json", &report)?;
    if write_samples {
        let samples = sample_cells(config, None, &rng)?;
        let mut buf = Vec::new();
        write_samples_csv(&samples, &mut buf)?;
        out.write("typical_cell_samples.csv", &buf)?;
    }
    Ok(report)
}
