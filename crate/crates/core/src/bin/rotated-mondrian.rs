use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rotated_mondrian::experiments::{
    self, ConvergeConfig, MondrianLineConfig, MondrianLineSpec, RecoverConfig, RegressConfig, RunOptions,
};
use rotated_mondrian::features::Method;
use rotated_mondrian::stochgeom::TypicalCellConfig;

/// Random-partition kernel experiments.
///
/// Defaults are desk-scale; sizes from the original protocol are reachable
/// through the flags (for example `recover --n-per-split 500`).
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    /// Master seed; every output is a deterministic function of it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Skip SVG plots.
    #[arg(long, global = true, overrides_with = "svg")]
    no_svg: bool,
    /// Write SVG plots (default).
    #[arg(long, global = true)]
    svg: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximum kernel error against the number of components.
    Converge(ConvergeArgs),
    /// Lifetime recovery on Gaussian-process data.
    Recover(RecoverArgs),
    /// Validation error against feature count and CPU time.
    Regress(RegressArgs),
    /// Relative error against lifetime on the rotated thin slab.
    MondrianLine(LineArgs),
    /// Typical-cell moments and bounds; exits 1 if a check fails.
    TypicalCell(CellArgs),
}

#[derive(Args)]
struct ConvergeArgs {
    /// Comma-separated subset of fourier,binning,mondrian,rotated-mondrian.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    /// Largest number of components M.
    #[arg(long, default_value_t = 50)]
    features: usize,
    #[arg(long, default_value_t = 10.0)]
    lifetime: f64,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    #[arg(long, default_value_t = 100)]
    points: usize,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Monte Carlo directions for the limit kernel when dim >= 3.
    #[arg(long, default_value_t = 20_000)]
    samples: usize,
}

#[derive(Args)]
struct RecoverArgs {
    #[arg(long, default_value_t = 150)]
    n_per_split: usize,
    #[arg(long, default_value_t = 50)]
    features: usize,
    /// Lifetime of the generating kernel.
    #[arg(long, default_value_t = 10.0)]
    lifetime: f64,
    #[arg(long, default_value_t = 30.0)]
    lifetime_max: f64,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    #[arg(long, default_value_t = 200)]
    evaluations: usize,
    #[arg(long, default_value_t = 20_000)]
    samples: usize,
}

#[derive(Args)]
struct RegressArgs {
    /// CSV file with a header row; a synthetic stand-in is used if absent.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Target column of --input.
    #[arg(long)]
    target: Option<String>,
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    /// Feature counts of the error-versus-features curves.
    #[arg(long, value_delimiter = ',')]
    feature_counts: Option<Vec<usize>>,
    /// Components of the timed runs.
    #[arg(long, default_value_t = 350)]
    features: usize,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    /// Lifetime of fourier, binning and mondrian in the feature curves.
    #[arg(long, default_value_t = 1e-6)]
    lifetime: f64,
    /// Lifetime of rotated-mondrian in the feature curves.
    #[arg(long, default_value_t = 2.5e-7)]
    rotated_lifetime: f64,
    /// Upper end of the timed lifetime search (default from the data).
    #[arg(long)]
    lifetime_max: Option<f64>,
    /// Lower end of the timed lifetime search; needs --lifetime-max.
    #[arg(long, requires = "lifetime_max")]
    lifetime_min: Option<f64>,
    #[arg(long, default_value_t = 600)]
    rows: usize,
    #[arg(long, default_value_t = 12)]
    search_budget: usize,
    /// Only the error-versus-features curves.
    #[arg(long, conflicts_with = "timing_only")]
    features_only: bool,
    /// Only the timed runs.
    #[arg(long)]
    timing_only: bool,
}

#[derive(Args)]
struct LineArgs {
    #[arg(long, default_value_t = 500)]
    n_per_split: usize,
    #[arg(long, default_value_t = 0.01)]
    eps: f64,
    #[arg(long, default_value_t = 500)]
    features: usize,
    #[arg(long, default_value_t = 1000.0)]
    lifetime_max: f64,
    #[arg(long, default_value_t = 60)]
    evaluations: usize,
}

#[derive(Args)]
struct CellArgs {
    /// Number of superposed rotated tessellations.
    #[arg(long, default_value_t = 1)]
    rotations: usize,
    #[arg(long, default_value_t = 1.0)]
    lifetime: f64,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Circumradius survival thresholds.
    #[arg(long, value_delimiter = ',')]
    thresholds: Option<Vec<f64>>,
    /// Also write per-sample volume, inradius and circumradius.
    #[arg(long)]
    write_samples: bool,
}

fn run(cli: Cli) -> rotated_mondrian::Result<bool> {
    let seed = cli
        .seed
        .ok_or_else(|| rotated_mondrian::Error::InvalidParameter("--seed is required".into()))?;
    let options = RunOptions {
        seed,
        out_dir: cli.out,
        svg: !cli.no_svg,
    };
    match cli.command {
        Command::Converge(a) => {
            let config = ConvergeConfig {
                methods: a.methods.unwrap_or_else(|| Method::ALL.to_vec()),
                n_points: a.points,
                dim: a.dim,
                lifetime: a.lifetime,
                max_features: a.features,
                repeats: a.repeats,
                limit_samples: a.samples,
            };
            experiments::converge(&config, &options)?;
        }
        Command::Recover(a) => {
            let config = RecoverConfig {
                n_per_split: a.n_per_split,
                dim: a.dim,
                true_lifetime: a.lifetime,
                lifetime_max: a.lifetime_max,
                features: a.features,
                noise_sd: a.noise,
                max_evaluations: a.evaluations,
                limit_samples: a.samples,
                ..RecoverConfig::default()
            };
            let summary = experiments::recover(&config, &options)?;
            println!("lifetime_hat = {}", summary.lifetime_hat);
        }
        Command::Regress(a) => {
            let mut config = RegressConfig {
                input: a.input,
                target: a.target,
                synthetic_rows: a.rows,
                repeats: a.repeats,
                timing_features: a.features,
                search_budget: a.search_budget,
                lifetime_range: a.lifetime_max.map(|hi| (a.lifetime_min.unwrap_or(hi * 1e-3), hi)),
                feature_curves: !a.timing_only,
                timing: !a.features_only,
                ..RegressConfig::default()
            };
            if let Some(m) = a.methods {
                config.methods = m;
            }
            if let Some(c) = a.feature_counts {
                config.feature_counts = c;
            }
            for m in [Method::Fourier, Method::Binning, Method::Mondrian] {
                config.lifetimes.insert(m, a.lifetime);
            }
            config.lifetimes.insert(Method::RotatedMondrian, a.rotated_lifetime);
            experiments::regress(&config, &options)?;
        }
        Command::MondrianLine(a) => {
            let config = MondrianLineConfig {
                spec: MondrianLineSpec {
                    n_per_split: a.n_per_split,
                    eps: a.eps,
                    ..MondrianLineSpec::default()
                },
                features: a.features,
                lifetime_max: a.lifetime_max,
                max_evaluations: a.evaluations,
                ..MondrianLineConfig::default()
            };
            for s in experiments::mondrian_line(&config, &options)? {
                println!(
                    "{}: lifetime_hat = {}, test relative error = {}",
                    s.method, s.lifetime_hat, s.test_relative_error
                );
            }
        }
        Command::TypicalCell(a) => {
            let mut config = TypicalCellConfig::new(a.rotations, a.lifetime, a.dim, a.samples);
            if let Some(t) = a.thresholds {
                config.thresholds = t;
            }
            let report = experiments::typical_cell(&config, a.write_samples, &options)?;
            println!(
                "{}",
                if report.passed {
                    "all checks passed"
                } else {
                    "some checks failed"
                }
            );
            return Ok(report.passed);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
