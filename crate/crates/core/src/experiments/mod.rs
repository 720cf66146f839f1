//! Drivers for the reproduction experiments behind the command-line tool.
//!
//! Every driver is deterministic given its seed: randomness is drawn from
//! fixed substreams of one [`SeededRng`], and parallel work is collected in
//! a fixed order. Each output file is accompanied by `<file>.meta.json`
//! recording the command, configuration, seed and crate version.

mod cell;
mod converge;
mod line;
mod recover;
mod regress;
pub mod svg;

use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

pub use cell::typical_cell;
pub use converge::{converge, median_by_features, run_converge, ConvergeConfig, ConvergeRow};
pub use line::{
    mondrian_line, mondrian_line_dataset, mondrian_line_label, run_mondrian_line, LineMethodSummary, LineRow,
    MondrianLineConfig, MondrianLineSpec,
};
pub use recover::{recover, run_recover, RecoverConfig, RecoverSummary};
pub use regress::{
    cpu_like_dataset, regress, run_feature_curves, run_timing, FeatureRow, MethodCurve, RegressConfig, RegressSummary,
    TimedResult, TimingRow,
};

/// Version string written to every sidecar.
pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

/// Where and how a driver writes its files.
#[derive(Clone, Debug, Serialize)]
pub struct RunOptions {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub svg: bool,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    file: &'a str,
    command: &'a str,
    version: &'a str,
    seed: u64,
    config: &'a serde_json::Value,
}

/// Writes output files plus their metadata sidecars.
pub struct Output {
    dir: PathBuf,
    command: &'static str,
    seed: u64,
    svg: bool,
    config: serde_json::Value,
    written: Vec<PathBuf>,
}

impl Output {
    pub fn new<C: Serialize>(command: &'static str, config: &C, options: &RunOptions) -> Result<Self> {
        fs::create_dir_all(&options.out_dir).map_err(|e| Error::io(&options.out_dir, e))?;
        Ok(Self {
            dir: options.out_dir.clone(),
            command,
            seed: options.seed,
            svg: options.svg,
            config: serde_json::to_value(config)?,
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        let meta = Sidecar {
            file: name,
            command: self.command,
            version: VERSION,
            seed: self.seed,
            config: &self.config,
        };
        let meta_path = self.dir.join(format!("{name}.meta.json"));
        let mut text = serde_json::to_string_pretty(&meta)?;
        text.push('\n');
        fs::write(&meta_path, text).map_err(|e| Error::io(&meta_path, e))?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn write_csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<PathBuf> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::io(name, e.into_error()))?;
        self.write(name, &bytes)
    }

    /// Writes the plot unless SVG output is disabled.
    pub fn write_svg(&mut self, name: &str, plot: &svg::Plot) -> Result<Option<PathBuf>> {
        if !self.svg {
            return Ok(None);
        }
        self.write(name, plot.render().as_bytes()).map(Some)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

/// CPU time consumed by this process so far, in seconds.
pub fn process_cpu_seconds() -> f64 {
    let mut ts = libc::timespec { tv_sec: 0, tv_nsec: 0 };
    // SAFETY: `ts` is a valid, writable timespec.
    let rc = unsafe { libc::clock_gettime(libc::CLOCK_PROCESS_CPUTIME_ID, &mut ts) };
    if rc != 0 {
        return f64::NAN;
    }
    ts.tv_sec as f64 + ts.tv_nsec as f64 * 1e-9
}

/// `n` points uniform on `[0, 1]^d`.
pub fn uniform_points<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|_| rng.gen::<f64>()).collect()).collect()
}

/// Median with the midpoint convention for even lengths; NaN when empty.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        (v[k - 1] + v[k]) / 2.0
    }
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::param(format!("{name} must be positive, got {value}")));
    }
    Ok(())
}

fn check_count(name: &str, value: usize) -> Result<()> {
    if value == 0 {
        return Err(Error::param(format!("{name} must be at least 1")));
    }
    Ok(())
}
